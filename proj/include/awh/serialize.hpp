#pragma once

#include "awh/martingale.hpp"
#include "awh/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace awh {

inline constexpr const char* kSchema = "aw-harness/1";
inline constexpr const char* kVersion = "0.1.0";

// Shortest decimal that round-trips the exact double.  Every CSV writer goes
// through this so equal-seed runs produce byte-identical files.
std::string fmt_double(double v);

// "# aw-harness/1 version=<semver> config=<hash> seed=<seed>"
std::string repro_header(uint64_t config_hash, uint64_t seed);

// {"A":[re,im], "B":..., "C":..., "D":..., "q":q}.  The reader also accepts
// bare numbers for real A..D and re-validates, so hand-written files with an
// inadmissible set are rejected with the offending product named.
std::string params_to_json(const ProcessParams& p, int indent = 2);
ProcessParams params_from_json(const std::string& text);

std::string greeks_to_json(const HarnessParams& h, int indent = 2);
HarnessParams greeks_from_json(const std::string& text);

std::string identity_report_to_json(const IdentityReport& r, int indent = 2);

// Rows path_id,t,y,z,x; t is the (Y,Z)-clock time, x the X-process value at
// the corresponding X-time h(t).
void write_trajectories_csv(std::ostream& os, const ProcessParams& p,
                            const std::vector<Trajectory>& paths,
                            uint64_t config_hash, uint64_t seed);
std::string trajectories_to_json(const ProcessParams& p,
                                 const std::vector<Trajectory>& paths,
                                 uint64_t config_hash, uint64_t seed,
                                 int indent = 2);

std::string mc_report_to_json(const McConditional& r, uint64_t config_hash,
                              uint64_t seed, int indent = 2);

}  // namespace awh
