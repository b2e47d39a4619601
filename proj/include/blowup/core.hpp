#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace blowup {

enum class Regime { S, LS, HS };

std::string to_string(Regime r);

double beta(double n, double p);

struct Equilibria {
    double f_star;
    double F_star;
};

Equilibria equilibria(double n, double p);

Regime classify_regime(double n, double p);

// True when p sits on n+1 up to the regime tie-break tolerance.
bool is_variational(double n, double p);

/// Exponent pair (n, p) together with the derived quantities every solver needs.
class ProblemParams {
public:
    ProblemParams(double n, double p);

    double n() const { return n_; }
    double p() const { return p_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double nu_var() const { return nu_var_; }
    Regime regime() const { return regime_; }
    double f_star() const { return f_star_; }
    double F_star() const { return F_star_; }

private:
    double n_, p_, alpha_, beta_, nu_var_;
    Regime regime_;
    double f_star_, F_star_;
};

inline constexpr std::size_t kDefaultMaxNodes = 20000;

// Reads BLOWUP_MAX_NODES, falling back to kDefaultMaxNodes.
std::size_t max_nodes_from_env();

struct Mesh {
    std::vector<double> nodes;
    std::size_t max_nodes = kDefaultMaxNodes;

    Mesh() = default;
    explicit Mesh(std::vector<double> x, std::size_t cap = kDefaultMaxNodes);

    std::size_t size() const { return nodes.size(); }
    double front() const { return nodes.front(); }
    double back() const { return nodes.back(); }

    // Throws std::invalid_argument when the invariants are broken.
    void validate() const;

    static Mesh uniform(double a, double b, std::size_t count, std::size_t cap = kDefaultMaxNodes);
};

/// Ordered crossing record: signed entries count hits of +F_* or -F_*, unsigned ones count zeros.
struct MultiIndex {
    enum class Kind { plus, zero, minus };
    struct Entry {
        Kind kind;
        int count;
        bool operator==(const Entry&) const = default;
    };

    std::vector<Entry> entries;
    double tail_threshold = 1e-4;

    bool operator==(const MultiIndex& o) const { return entries == o.entries; }

    MultiIndex negated() const;
    std::string str() const;
    static MultiIndex parse(const std::string& text);
};

} // namespace blowup
