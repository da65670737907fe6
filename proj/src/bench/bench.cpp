// Copyright 2026 The dpstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpstore/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "dpstore/blockstore/cipher.hpp"
#include "dpstore/dpir.hpp"
#include "dpstore/dpkvs.hpp"
#include "dpstore/dpram.hpp"
#include "dpstore/random.hpp"

namespace dpstore::bench {

Scheme parse_scheme(const std::string& s) {
  if (s == "dpir") return Scheme::kDpIr;
  if (s == "dpram") return Scheme::kDpRam;
  if (s == "dpkvs") return Scheme::kDpKvs;
  throw ParameterError("unknown scheme '" + s + "'");
}

Workload parse_workload(const std::string& s) {
  if (s == "uniform") return Workload::kUniform;
  if (s == "zipf") return Workload::kZipf;
  if (s == "repeat-one") return Workload::kRepeatOne;
  throw ParameterError("unknown workload '" + s + "'");
}

std::string name(Scheme s) {
  switch (s) {
    case Scheme::kDpIr: return "dpir";
    case Scheme::kDpRam: return "dpram";
    case Scheme::kDpKvs: return "dpkvs";
  }
  return "?";
}

std::string name(Workload w) {
  switch (w) {
    case Workload::kUniform: return "uniform";
    case Workload::kZipf: return "zipf";
    case Workload::kRepeatOne: return "repeat-one";
  }
  return "?";
}

namespace {

// Draws keys in [1, universe] under the workload's law.
class KeyLaw {
 public:
  KeyLaw(Workload w, std::uint64_t universe, double exponent) : w_(w), universe_(universe) {
    if (w_ == Workload::kZipf) {
      cdf_.resize(universe);
      double acc = 0.0;
      for (std::uint64_t i = 0; i < universe; ++i) {
        acc += std::pow(static_cast<double>(i + 1), -exponent);
        cdf_[i] = acc;
      }
      for (double& c : cdf_) c /= acc;
    }
  }

  std::uint64_t draw(ChaChaRng& rng) const {
    switch (w_) {
      case Workload::kUniform: return rng.index(universe_);
      case Workload::kRepeatOne: return 1;
      case Workload::kZipf: {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), rng.unit());
        return std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cdf_.begin()) + 1,
                                       universe_);
      }
    }
    return 1;
  }

 private:
  Workload w_;
  std::uint64_t universe_;
  std::vector<double> cdf_;
};

std::unique_ptr<blockstore::BlockStore> open_store(const BenchConfig& config,
                                                   std::uint64_t cells, std::size_t cell_size) {
  if (config.server) {
    return std::make_unique<blockstore::RemoteStore>(*config.server, cells, cell_size);
  }
  return std::make_unique<blockstore::MemoryStore>(cells, cell_size);
}

Bytes random_block(ChaChaRng& rng, std::size_t size) {
  Bytes b(size);
  rng.fill(b.data(), b.size());
  return b;
}

blockstore::AeadCipher make_cipher(ChaChaRng& rng) {
  Bytes key = random_block(rng, blockstore::CipherKey::kSize);
  return blockstore::AeadCipher(blockstore::CipherKey::from_bytes(key), rng.derive("nonces"));
}

struct Recorder {
  BenchResult& r;
  blockstore::BlockStore& store;
  double sum = 0.0;

  void begin() { store.reset_counters(); }
  std::uint64_t op(std::uint64_t before) {
    const std::uint64_t used = store.counters().touches() - before;
    if (r.ops == 0) {
      r.blocks_per_op_min = r.blocks_per_op_max = used;
    } else {
      r.blocks_per_op_min = std::min(r.blocks_per_op_min, used);
      r.blocks_per_op_max = std::max(r.blocks_per_op_max, used);
    }
    sum += static_cast<double>(used);
    ++r.ops;
    return used;
  }
  std::uint64_t now() const { return store.counters().touches(); }
};

dpkvs::KvsParams kvs_params(const BenchConfig& c) {
  auto p = dpkvs::KvsParams::for_capacity(c.n, c.block_size);
  p.uniform_shape = c.uniform_shape;
  return p;
}

dpram::RamParams ram_params(const BenchConfig& c) {
  const std::uint64_t C = c.threshold ? c.threshold : dpram::RamParams::default_threshold(c.n);
  return dpram::RamParams::with_threshold(c.n, C, c.block_size);
}

dpir::DpIrParams ir_params(const BenchConfig& c) {
  return c.epsilon > 0 ? dpir::DpIrParams::for_budget(c.n, c.alpha, c.epsilon)
                       : dpir::DpIrParams::with_k(c.n, c.alpha, c.k);
}

}  // namespace

std::pair<std::uint64_t, std::size_t> store_shape(const BenchConfig& config) {
  constexpr std::size_t kOverhead =
      blockstore::AeadCipher::kNonceSize + blockstore::AeadCipher::kTagSize;
  switch (config.scheme) {
    case Scheme::kDpIr:
    case Scheme::kDpRam: return {config.n, config.block_size + kOverhead};
    case Scheme::kDpKvs: {
      auto p = kvs_params(config);
      return {p.cells(), p.slot_size() + kOverhead};
    }
  }
  return {0, 0};
}

BenchResult run_bench(const BenchConfig& config) {
  BenchResult r;
  r.scheme = name(config.scheme);
  r.workload = name(config.workload);
  r.n = config.n;
  ChaChaRng root(config.seed, "bench");
  ChaChaRng ops_rng = root.derive("ops");
  ChaChaRng data_rng = root.derive("data");
  ChaChaRng cipher_rng = root.derive("cipher");
  auto [cells, cell_size] = store_shape(config);
  auto store = open_store(config, cells, cell_size);
  auto cipher = make_cipher(cipher_rng);
  Recorder rec{r, *store};
  const auto start = std::chrono::steady_clock::now();

  try {
    switch (config.scheme) {
      case Scheme::kDpIr: {
        const auto params = ir_params(config);
        r.k = params.k;
        for (BlockId i = 1; i <= config.n; ++i) {
          store->upload(i, cipher.encrypt(random_block(data_rng, config.block_size)));
        }
        KeyLaw law(config.workload, config.n, config.zipf_exponent);
        ChaChaRng query_rng = root.derive("dpir");
        rec.begin();
        for (std::uint64_t op = 0; op < config.ops; ++op) {
          const std::uint64_t before = rec.now();
          auto res = dpir::ir_query(params, law.draw(ops_rng), *store, cipher, query_rng);
          r.scheme_touches += res.transcript.indices.size();
          rec.op(before);
        }
        break;
      }
      case Scheme::kDpRam: {
        const auto params = ram_params(config);
        dpram::RamClient client(params, *store, cipher,
                                dpram::RamStreams::from_rng(root.derive("dpram")));
        std::vector<Bytes> blocks;
        blocks.reserve(config.n);
        for (std::uint64_t i = 0; i < config.n; ++i) {
          blocks.push_back(random_block(data_rng, config.block_size));
        }
        client.setup(blocks);
        blocks.clear();
        blocks.shrink_to_fit();
        KeyLaw law(config.workload, config.n, config.zipf_exponent);
        rec.begin();
        const std::uint64_t base = client.touches();
        r.stash_max = client.stash_size();
        for (std::uint64_t op = 0; op < config.ops; ++op) {
          const std::uint64_t before = rec.now();
          const BlockId idx = law.draw(ops_rng);
          if (ops_rng.below(2)) {
            client.write(idx, random_block(data_rng, config.block_size));
          } else {
            client.read(idx);
          }
          rec.op(before);
          r.stash_max = std::max<std::uint64_t>(r.stash_max, client.stash_size());
        }
        r.scheme_touches = client.touches() - base;
        break;
      }
      case Scheme::kDpKvs: {
        const auto params = kvs_params(config);
        r.levels = params.layout.levels;
        dpkvs::KvsClient client(params, *store, cipher,
                                mapping::MappingFn::from_rng(root.derive("prf")),
                                mapping::TagFn::from_rng(root.derive("tag")),
                                dpram::RamStreams::from_rng(root.derive("dpkvs")),
                                root.derive("pad"));
        client.setup();
        // Keys drawn from a universe of n/2 so puts never exhaust capacity.
        KeyLaw law(config.workload, std::max<std::uint64_t>(config.n / 2, 1),
                   config.zipf_exponent);
        rec.begin();
        const std::uint64_t base = client.touches();
        r.stash_max = client.stats().stash_buckets;
        for (std::uint64_t op = 0; op < config.ops; ++op) {
          const std::uint64_t before = rec.now();
          const std::string key = "key-" + std::to_string(law.draw(ops_rng));
          if (ops_rng.below(2)) {
            client.put(key, random_block(data_rng, config.block_size));
            r.blocks_per_put = std::max(r.blocks_per_put, rec.op(before));
          } else {
            client.get(key);
            r.blocks_per_get = std::max(r.blocks_per_get, rec.op(before));
          }
          auto st = client.stats();
          r.stash_max = std::max(r.stash_max, st.stash_buckets);
          r.super_root_max = std::max(r.super_root_max, st.super_root_load);
        }
        r.scheme_touches = client.touches() - base;
        break;
      }
    }
  } catch (const std::exception& e) {
    r.partial = true;
    r.error = e.what();
  }

  r.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.store_touches = store->counters().touches();
  if (r.ops) {
    r.blocks_per_op_mean = rec.sum / static_cast<double>(r.ops);
    // One request/response per cell operation.
    r.round_trips_per_op = static_cast<double>(r.store_touches) / static_cast<double>(r.ops);
  }
  return r;
}

namespace {

// Least squares y = a + b x; returns {b, a}.
std::pair<double, double> fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double var = n * sxx - sx * sx;
  if (var == 0) return {0.0, n ? sy / n : 0.0};
  const double b = (n * sxy - sx * sy) / var;
  return {b, (sy - b * sx) / n};
}

}  // namespace

GrowthCurve growth_curve(const BenchConfig& base, std::span<const std::uint64_t> grid) {
  GrowthCurve curve;
  std::vector<double> x, y, lv;
  for (std::uint64_t n : grid) {
    BenchConfig c = base;
    c.n = n;
    BenchResult r = run_bench(c);
    x.push_back(std::log2(static_cast<double>(n)));
    y.push_back(r.blocks_per_op_mean);
    lv.push_back(r.levels);
    curve.points.push_back(std::move(r));
  }
  std::tie(curve.slope_per_doubling, curve.intercept) = fit(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    curve.residuals.push_back(y[i] - (curve.intercept + curve.slope_per_doubling * x[i]));
  }
  if (base.scheme == Scheme::kDpKvs) curve.slope_per_level = fit(lv, y).first;
  return curve;
}

std::string csv_header() {
  return "scheme,workload,n,ops,blocks_per_op_mean,blocks_per_op_min,blocks_per_op_max,"
         "round_trips_per_op,stash_max,super_root_max,k,levels,blocks_per_get,blocks_per_put,"
         "wall_time_s,partial";
}

std::string csv_row(const BenchResult& r) {
  std::ostringstream out;
  out << r.scheme << ',' << r.workload << ',' << r.n << ',' << r.ops << ','
      << r.blocks_per_op_mean << ',' << r.blocks_per_op_min << ',' << r.blocks_per_op_max << ','
      << r.round_trips_per_op << ',' << r.stash_max << ',' << r.super_root_max << ',' << r.k
      << ',' << r.levels << ',' << r.blocks_per_get << ',' << r.blocks_per_put << ','
      << r.wall_time_s << ',' << (r.partial ? 1 : 0);
  return out.str();
}

}  // namespace dpstore::bench
