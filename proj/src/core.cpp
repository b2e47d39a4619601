#include "blowup/core.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace blowup {

namespace {

void check_domain(double n, double p) {
    if (!(n > 0.0) || std::isnan(n))
        throw std::domain_error("n must be positive");
    if (!(p > 1.0) || std::isnan(p))
        throw std::domain_error("p must exceed 1");
}

} // namespace

std::string to_string(Regime r) {
    switch (r) {
    case Regime::S: return "S";
    case Regime::LS: return "LS";
    case Regime::HS: return "HS";
    }
    return "?";
}

double beta(double n, double p) {
    check_domain(n, p);
    if (is_variational(n, p)) return 0.0;
    return (p - (n + 1.0)) / (4.0 * (p - 1.0));
}

Equilibria equilibria(double n, double p) {
    check_domain(n, p);
    const double f = std::pow(p - 1.0, -1.0 / (p - 1.0));
    return {f, std::pow(f, n + 1.0)};
}

bool is_variational(double n, double p) {
    return std::abs(p - (n + 1.0)) <= 1e-12 * (n + 1.0);
}

Regime classify_regime(double n, double p) {
    check_domain(n, p);
    if (is_variational(n, p)) return Regime::S;
    return p > n + 1.0 ? Regime::LS : Regime::HS;
}

ProblemParams::ProblemParams(double n, double p) : n_(n), p_(p) {
    check_domain(n, p);
    alpha_ = n / (n + 1.0);
    beta_ = blowup::beta(n, p);
    nu_var_ = (n + 2.0) / (n + 1.0);
    regime_ = classify_regime(n, p);
    const auto eq = equilibria(n, p);
    f_star_ = eq.f_star;
    F_star_ = eq.F_star;
}

std::size_t max_nodes_from_env() {
    if (const char* s = std::getenv("BLOWUP_MAX_NODES")) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && v >= 5) return static_cast<std::size_t>(v);
    }
    return kDefaultMaxNodes;
}

Mesh::Mesh(std::vector<double> x, std::size_t cap) : nodes(std::move(x)), max_nodes(cap) {}

void Mesh::validate() const {
    if (nodes.size() < 5) throw std::invalid_argument("mesh needs at least 5 nodes");
    if (nodes.size() > max_nodes) throw std::invalid_argument("mesh exceeds max_nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("mesh nodes must increase strictly");
}

Mesh Mesh::uniform(double a, double b, std::size_t count, std::size_t cap) {
    if (count < 2 || !(b > a)) throw std::invalid_argument("bad uniform mesh request");
    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i)
        x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    x.back() = b;
    return Mesh(std::move(x), cap);
}

MultiIndex MultiIndex::negated() const {
    MultiIndex out = *this;
    for (auto& e : out.entries) {
        if (e.kind == Kind::plus) e.kind = Kind::minus;
        else if (e.kind == Kind::minus) e.kind = Kind::plus;
    }
    return out;
}

std::string MultiIndex::str() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) os << ',';
        const auto& e = entries[i];
        if (e.kind == Kind::plus) os << '+';
        else if (e.kind == Kind::minus) os << '-';
        os << e.count;
    }
    os << '}';
    return os.str();
}

MultiIndex MultiIndex::parse(const std::string& text) {
    MultiIndex out;
    std::string body = text;
    if (!body.empty() && body.front() == '{') body.erase(body.begin());
    if (!body.empty() && body.back() == '}') body.pop_back();
    std::istringstream is(body);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        Entry e{Kind::zero, 0};
        std::size_t pos = 0;
        if (tok[0] == '+') { e.kind = Kind::plus; pos = 1; }
        else if (tok[0] == '-') { e.kind = Kind::minus; pos = 1; }
        e.count = std::stoi(tok.substr(pos));
        if (e.count < 1) throw std::invalid_argument("multiindex counts must be positive");
        out.entries.push_back(e);
    }
    return out;
}

} // namespace blowup
