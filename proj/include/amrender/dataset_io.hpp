// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "amrender/amr_tree.hpp"

namespace amrender {

// PAMR layout, little-endian throughout.
//
// Header file <base>.pamr:
//   "PAMR" | u32 version=1 | u32 ndim=3 | u32 levelmin | u32 levelmax | f64 box_len
//   | u32 nfields | nfields x (u16 name_len, name bytes, u8 conservative)
//   | u32 ndomains | ndomains x u64 record_count
//
// Payload file <base>.dNNNNN, one per domain, a sequence of records:
//   u8 level | u8 is_leaf | u32 ix | u32 iy | u32 iz | nfields x f64
//
// Records are written in depth-first order (children by ascending octant) and
// split into contiguous runs of near-equal length, one run per domain.

inline constexpr std::uint32_t kPamrVersion = 1;

struct DatasetHeader {
  std::uint32_t version = kPamrVersion;
  std::uint32_t ndim = 3;
  int levelmin = 0;
  int levelmax = 0;
  double box_len = 1.0;
  std::vector<FieldDescriptor> fields;
  std::vector<std::uint64_t> domain_records;

  std::uint32_t ndomains() const { return static_cast<std::uint32_t>(domain_records.size()); }
  std::uint64_t record_count() const;
  std::size_t record_size() const { return 14 + 8 * fields.size(); }

  bool operator==(const DatasetHeader&) const = default;
};

std::filesystem::path header_path(const std::filesystem::path& base);
std::filesystem::path payload_path(const std::filesystem::path& base, std::uint32_t domain);

/// Record counts per domain: the first (n % ndomains) domains get one extra.
std::vector<std::uint64_t> partition_counts(std::uint64_t n, std::uint32_t ndomains);

/// Writes <base>.pamr and ndomains payload files. Throws ArgumentError when
/// ndomains is 0 or exceeds the node count, IoError on write failures.
DatasetHeader write_dataset(const AmrTree& tree, const std::filesystem::path& base, std::uint32_t ndomains);

/// Throws IoError, FormatError (magic/version/ndim) or CorruptionError (truncation).
DatasetHeader read_header(const std::filesystem::path& base);

/// Counters filled by the readers; used to check that deep records are skipped.
struct ReadStats {
  std::uint64_t records_scanned = 0;
  std::uint64_t records_materialized = 0;
  int deepest_materialized_level = -1;

  ReadStats& operator+=(const ReadStats& o);
};

struct ReadOptions {
  /// Records deeper than this are skipped; nodes whose children were skipped become leaves.
  std::optional<int> max_level;
  /// Domains parsed concurrently; the result does not depend on this.
  unsigned threads = 1;
  ReadStats* stats = nullptr;
};

/// Reads every domain into one tree. Throws FormatError, CorruptionError,
/// StructuralError (incomplete child set, orphan record) or IoError.
AmrTree read_dataset(const std::filesystem::path& base, const ReadOptions& opts = {});

/// Reads a single payload file into a partial tree: the domain's cells are
/// present and their missing ancestors/siblings are placeholders. Present
/// records that are refined below the cap but whose children live in other
/// domains get placeholder children.
AmrTree read_domain(const std::filesystem::path& base, std::uint32_t domain, const ReadOptions& opts = {});

}  // namespace amrender
