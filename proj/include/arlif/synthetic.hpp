#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "arlif/ingest.hpp"

namespace arlif {

/// Generates connection records in the NSL-KDD (43-field) or KDDCUP'99
/// (42-field) text layout. Normal traffic is mostly established TCP sessions;
/// attacks follow SYN-flood, ICMP echo flood, port-sweep and password-guessing
/// profiles, with a share of low-and-slow attacks that resemble normal rows.
/// Deterministic in (count, seed, attack_fraction).
std::vector<std::string> synthetic_lines(std::size_t count, std::uint64_t seed,
                                         DatasetFormat format = DatasetFormat::NslKdd,
                                         double attack_fraction = 0.45);

std::vector<Record> synthetic_records(std::size_t count, std::uint64_t seed,
                                      double attack_fraction = 0.45);

}  // namespace arlif
