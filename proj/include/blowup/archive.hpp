#pragma once

#include "blowup/continuation.hpp"
#include "blowup/oscillatory.hpp"
#include "blowup/profiles.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace blowup {

inline constexpr int kArchiveVersion = 1;

struct ArchiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Provenance {
    std::string command;
    double tol = 0;
    double eps = 0;
};

struct ProfileArchive {
    ProfileSolution solution;
    Provenance provenance;
};

// Only the last point of a branch keeps its full profile; earlier points keep their summaries.
struct BranchArchive {
    Branch branch;
    Provenance provenance;
};

std::string dump_profile(const ProfileSolution& sol, const Provenance& prov);
ProfileArchive parse_profile(const std::string& text);
std::string dump_branch(const Branch& br, const Provenance& prov);
BranchArchive parse_branch(const std::string& text);

// "profile" or "branch"; throws ArchiveError on anything else.
std::string archive_kind(const std::string& text);

std::string read_file(const std::string& path);
// Writes through a temporary file and a rename so readers never see a partial archive.
void write_file(const std::string& path, const std::string& text);

// 17 significant digits.
std::string fmt(double v);

void write_profile_csv(std::ostream& os, const ProfileSolution& sol);
// (log10(y0 - y), log10|F|) for y0 - y in (0, y0].
void write_log_interface_csv(std::ostream& os, const ProfileSolution& sol, double y0);
void write_branch_csv(std::ostream& os, const Branch& br);
void write_oscillatory_csv(std::ostream& os, const OscComponent& c);
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

} // namespace blowup
