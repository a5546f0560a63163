// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/dataset_io.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include "amrender/errors.hpp"

namespace amrender {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'P', 'A', 'M', 'R'};

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    const U bits = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  void clear() { bytes_.clear(); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}

  template <class T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    require(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  std::string get_string(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) {
    require(n);
    pos_ += n;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void require(std::size_t n) const {
    if (size_ - pos_ < n) throw CorruptionError(what_ + ": truncated");
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void spill(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

// Records that survived the level filter, for one domain.
struct RecordBatch {
  std::uint32_t domain = 0;
  std::vector<CellCoord> coords;
  std::vector<std::uint8_t> leaf;
  std::vector<double> values;
  ReadStats stats;
};

RecordBatch parse_payload(const fs::path& base, const DatasetHeader& h, std::uint32_t domain, int max_level) {
  const fs::path path = payload_path(base, domain);
  const std::vector<std::uint8_t> bytes = slurp(path);
  const std::uint64_t expected = h.domain_records[domain] * h.record_size();
  if (bytes.size() < expected) {
    throw CorruptionError(path.string() + ": truncated (" + std::to_string(bytes.size()) + " of " +
                          std::to_string(expected) + " bytes)");
  }
  if (bytes.size() > expected) {
    throw CorruptionError(path.string() + ": " + std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  const std::size_t nf = h.fields.size();
  RecordBatch batch;
  batch.domain = domain;
  ByteReader r(bytes.data(), bytes.size(), path.string());
  for (std::uint64_t i = 0; i < h.domain_records[domain]; ++i) {
    const int level = r.get<std::uint8_t>();
    const std::uint8_t is_leaf = r.get<std::uint8_t>();
    ++batch.stats.records_scanned;
    if (level > h.levelmax) {
      throw StructuralError(path.string() + ": record at level " + std::to_string(level) + " above levelmax");
    }
    if (is_leaf > 1) throw StructuralError(path.string() + ": invalid leaf flag");
    if (level > max_level) {
      r.skip(12 + 8 * nf);
      continue;
    }
    CellCoord c{level, r.get<std::uint32_t>(), r.get<std::uint32_t>(), r.get<std::uint32_t>()};
    const std::uint64_t n = std::uint64_t{1} << level;
    if (c.ix >= n || c.iy >= n || c.iz >= n) {
      throw StructuralError(path.string() + ": cell index out of range at level " + std::to_string(level));
    }
    batch.coords.push_back(c);
    batch.leaf.push_back(is_leaf);
    for (std::size_t f = 0; f < nf; ++f) batch.values.push_back(r.get<double>());
    ++batch.stats.records_materialized;
    batch.stats.deepest_materialized_level = std::max(batch.stats.deepest_materialized_level, level);
  }
  return batch;
}

std::string describe(const CellCoord& c) {
  return "(level " + std::to_string(c.level) + ", " + std::to_string(c.ix) + "," + std::to_string(c.iy) + "," +
         std::to_string(c.iz) + ")";
}

// Inserts records top-down by coordinate. In `complete` mode every node must
// end up backed by a record; otherwise missing ones stay placeholders.
AmrTree assemble(const DatasetHeader& h, const std::vector<RecordBatch>& batches, int cap, bool complete) {
  AmrTreeBuilder b(h.box_len, h.levelmin, std::min(h.levelmax, cap), h.fields, h.ndomains());
  b.set_present(b.root(), false);
  std::vector<std::uint8_t> declared_leaf(1, 0);
  const std::size_t nf = h.fields.size();

  for (const RecordBatch& batch : batches) {
    for (std::size_t i = 0; i < batch.coords.size(); ++i) {
      const CellCoord& c = batch.coords[i];
      NodeId id = b.root();
      for (int l = 0; l < c.level; ++l) {
        if (b.node(id).is_leaf()) {
          if (b.node(id).present && declared_leaf[id]) {
            throw StructuralError("record " + describe(c) + " lies below a leaf record");
          }
          b.refine(id);
          for (int o = 0; o < 8; ++o) b.set_present(b.child(id, o), false);
          declared_leaf.resize(b.node_count(), 0);
        }
        const int shift = c.level - l - 1;
        const int k = octant_index(static_cast<int>((c.ix >> shift) & 1u), static_cast<int>((c.iy >> shift) & 1u),
                                   static_cast<int>((c.iz >> shift) & 1u));
        id = b.child(id, k);
      }
      if (b.node(id).present) throw StructuralError("duplicate record " + describe(c));
      if (batch.leaf[i] && !b.node(id).is_leaf()) {
        throw StructuralError("leaf record " + describe(c) + " has child records");
      }
      b.set_present(id, true);
      b.set_domain(id, batch.domain);
      b.set_values(id, std::span<const double>(batch.values.data() + i * nf, nf));
      declared_leaf[id] = batch.leaf[i];
    }
  }

  const std::size_t n = b.node_count();
  if (complete) {
    if (!b.node(b.root()).present) throw StructuralError("missing root record");
    for (NodeId id = 0; id < n; ++id) {
      const AmrNode& node = b.node(id);
      if (node.is_leaf()) continue;
      int present = 0;
      for (int o = 0; o < 8; ++o) present += b.node(b.child(id, o)).present ? 1 : 0;
      if (present != 8) {
        throw StructuralError("incomplete child set under " + describe(node.coord) + ": " + std::to_string(present) +
                              " of 8 children present");
      }
    }
  } else {
    for (NodeId id = 0; id < n; ++id) {
      const AmrNode& node = b.node(id);
      if (node.present && node.is_leaf() && !declared_leaf[id] && node.coord.level < cap) {
        b.refine(id);
        for (int o = 0; o < 8; ++o) b.set_present(b.child(id, o), false);
      }
    }
  }
  return std::move(b).build();
}

int effective_cap(const DatasetHeader& h, const ReadOptions& opts) {
  const int cap = opts.max_level.value_or(h.levelmax);
  if (cap < h.levelmin) {
    throw ArgumentError("max_level " + std::to_string(cap) + " below levelmin " + std::to_string(h.levelmin));
  }
  return std::min(cap, h.levelmax);
}

}  // namespace

std::uint64_t DatasetHeader::record_count() const {
  std::uint64_t n = 0;
  for (auto c : domain_records) n += c;
  return n;
}

ReadStats& ReadStats::operator+=(const ReadStats& o) {
  records_scanned += o.records_scanned;
  records_materialized += o.records_materialized;
  deepest_materialized_level = std::max(deepest_materialized_level, o.deepest_materialized_level);
  return *this;
}

fs::path header_path(const fs::path& base) {
  fs::path p = base;
  p += ".pamr";
  return p;
}

fs::path payload_path(const fs::path& base, std::uint32_t domain) {
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), ".d%05u", domain);
  fs::path p = base;
  p += suffix;
  return p;
}

std::vector<std::uint64_t> partition_counts(std::uint64_t n, std::uint32_t ndomains) {
  std::vector<std::uint64_t> counts(ndomains, n / ndomains);
  for (std::uint64_t d = 0; d < n % ndomains; ++d) ++counts[d];
  return counts;
}

DatasetHeader write_dataset(const AmrTree& tree, const fs::path& base, std::uint32_t ndomains) {
  if (!tree.is_complete()) throw ArgumentError("cannot write a partial (single-domain) tree");
  if (ndomains < 1) throw ArgumentError("ndomains must be at least 1");
  if (ndomains > tree.node_count()) {
    throw ArgumentError("ndomains (" + std::to_string(ndomains) + ") exceeds node count (" +
                        std::to_string(tree.node_count()) + ")");
  }
  DatasetHeader h;
  h.levelmin = tree.levelmin();
  h.levelmax = tree.levelmax();
  h.box_len = tree.box_len();
  h.fields = tree.fields();
  h.domain_records = partition_counts(tree.node_count(), ndomains);

  ByteWriter w;
  w.put_bytes(kMagic, 4);
  w.put(h.version);
  w.put(h.ndim);
  w.put(static_cast<std::uint32_t>(h.levelmin));
  w.put(static_cast<std::uint32_t>(h.levelmax));
  w.put(h.box_len);
  w.put(static_cast<std::uint32_t>(h.fields.size()));
  for (const auto& f : h.fields) {
    if (f.name.size() > 0xffff) throw ArgumentError("field name too long");
    w.put(static_cast<std::uint16_t>(f.name.size()));
    w.put_bytes(f.name.data(), f.name.size());
    w.put(static_cast<std::uint8_t>(f.conservative ? 1 : 0));
  }
  w.put(ndomains);
  for (auto c : h.domain_records) w.put(c);
  spill(header_path(base), w.bytes());

  const std::vector<NodeId> order = tree.dfs_order();
  std::size_t next = 0;
  for (std::uint32_t d = 0; d < ndomains; ++d) {
    w.clear();
    for (std::uint64_t i = 0; i < h.domain_records[d]; ++i, ++next) {
      const NodeId id = order[next];
      const AmrNode& n = tree.node(id);
      w.put(static_cast<std::uint8_t>(n.coord.level));
      w.put(static_cast<std::uint8_t>(n.is_leaf() ? 1 : 0));
      w.put(n.coord.ix);
      w.put(n.coord.iy);
      w.put(n.coord.iz);
      for (double v : tree.values(id)) w.put(v);
    }
    spill(payload_path(base, d), w.bytes());
  }
  return h;
}

DatasetHeader read_header(const fs::path& base) {
  const fs::path path = header_path(base);
  const std::vector<std::uint8_t> bytes = slurp(path);
  ByteReader r(bytes.data(), bytes.size(), path.string());
  if (bytes.size() < 4) throw CorruptionError(path.string() + ": truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic '" + std::string(bytes.begin(), bytes.begin() + 4) + "'");
  }
  r.skip(4);
  DatasetHeader h;
  h.version = r.get<std::uint32_t>();
  if (h.version != kPamrVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(h.version));
  h.ndim = r.get<std::uint32_t>();
  if (h.ndim != 3) throw FormatError(path.string() + ": ndim must be 3, got " + std::to_string(h.ndim));
  const auto levelmin = r.get<std::uint32_t>();
  const auto levelmax = r.get<std::uint32_t>();
  if (levelmin > levelmax || levelmax > 30) throw FormatError(path.string() + ": invalid level range");
  h.levelmin = static_cast<int>(levelmin);
  h.levelmax = static_cast<int>(levelmax);
  h.box_len = r.get<double>();
  if (!(h.box_len > 0.0) || !std::isfinite(h.box_len)) throw FormatError(path.string() + ": invalid box_len");
  const auto nfields = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < nfields; ++i) {
    FieldDescriptor f;
    const auto len = r.get<std::uint16_t>();
    f.name = r.get_string(len);
    f.conservative = r.get<std::uint8_t>() != 0;
    for (const auto& g : h.fields) {
      if (g.name == f.name) throw FormatError(path.string() + ": duplicate field '" + f.name + "'");
    }
    h.fields.push_back(std::move(f));
  }
  const auto ndomains = r.get<std::uint32_t>();
  if (ndomains < 1) throw FormatError(path.string() + ": ndomains must be at least 1");
  for (std::uint32_t d = 0; d < ndomains; ++d) h.domain_records.push_back(r.get<std::uint64_t>());
  if (r.remaining() != 0) throw CorruptionError(path.string() + ": trailing bytes after header");
  return h;
}

AmrTree read_dataset(const fs::path& base, const ReadOptions& opts) {
  const DatasetHeader h = read_header(base);
  const int cap = effective_cap(h, opts);
  const std::uint32_t nd = h.ndomains();
  std::vector<RecordBatch> batches(nd);

  const unsigned nthreads = std::clamp<unsigned>(opts.threads, 1u, nd);
  if (nthreads == 1) {
    for (std::uint32_t d = 0; d < nd; ++d) batches[d] = parse_payload(base, h, d, cap);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::uint32_t d = next++; d < nd; d = next++) {
          try {
            batches[d] = parse_payload(base, h, d, cap);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  if (opts.stats) {
    for (const auto& b : batches) *opts.stats += b.stats;
  }
  return assemble(h, batches, cap, true);
}

AmrTree read_domain(const fs::path& base, std::uint32_t domain, const ReadOptions& opts) {
  const DatasetHeader h = read_header(base);
  if (domain >= h.ndomains()) {
    throw ArgumentError("domain " + std::to_string(domain) + " out of range (ndomains " +
                        std::to_string(h.ndomains()) + ")");
  }
  const int cap = effective_cap(h, opts);
  std::vector<RecordBatch> batches;
  batches.push_back(parse_payload(base, h, domain, cap));
  if (opts.stats) *opts.stats += batches.front().stats;
  return assemble(h, batches, cap, false);
}

}  // namespace amrender
