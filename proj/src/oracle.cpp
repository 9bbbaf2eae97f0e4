#include "ogp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"
#include "ogp/common.hpp"

namespace ogp::oracle {

using nlohmann::json;

namespace {

constexpr double kSnapTol = 1e-9;

void check_mask_width(int n) {
  if (n < 1) throw ValidationError("need at least one vertex");
  if (n > 32) throw ResourceError("parity expansion limited to 32 spins");
}

ParityExpansion finish_expansion(int n, double constant,
                                 std::map<std::uint32_t, double>&& combined) {
  ParityExpansion pe;
  pe.n = n;
  pe.constant = constant;
  pe.masks.reserve(combined.size());
  pe.coeffs.reserve(combined.size());
  for (const auto& [mask, c] : combined) {
    pe.masks.push_back(mask);
    pe.coeffs.push_back(c);
  }
  pe.vertex_terms.assign(n, {});
  for (std::size_t t = 0; t < pe.masks.size(); ++t)
    for (int v = 0; v < n; ++v)
      if (pe.masks[t] >> v & 1u)
        pe.vertex_terms[v].push_back(static_cast<std::int32_t>(t));
  return pe;
}

// Visits configs in reflected Gray order over the low `bits` bits, starting
// from all-minus. One spin flips per step, so the energy updates through the
// terms touching that spin; for integer coefficients this is exact.
template <class Visit>
void gray_walk(const ParityExpansion& pe, int bits, Visit&& visit) {
  std::vector<double> signedc(pe.masks.size());
  double h = pe.constant;
  for (std::size_t t = 0; t < pe.masks.size(); ++t) {
    signedc[t] =
        (std::popcount(pe.masks[t]) & 1) ? -pe.coeffs[t] : pe.coeffs[t];
    h += signedc[t];
  }
  visit(0u, h);
  const std::uint64_t total = 1ull << bits;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int v = std::countr_zero(i);
    for (std::int32_t t : pe.vertex_terms[v]) {
      h -= 2.0 * signedc[t];
      signedc[t] = -signedc[t];
    }
    visit(static_cast<std::uint32_t>(i ^ (i >> 1)), h);
  }
}

BruteResult brute_core(const ParityExpansion& pe) {
  double best = -std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  gray_walk(pe, pe.n - 1, [&](std::uint32_t m, double h) {
    if (h > best) {
      best = h;
      best_mask = m;
    }
  });
  BruteResult out;
  out.value = best;
  out.argmax = spins_from_mask(best_mask, pe.n);
  return out;
}

EnergyTable table_core(const ParityExpansion& pe) {
  EnergyTable table;
  table.n = pe.n;
  table.values.resize(1ull << pe.n);
  gray_walk(pe, pe.n - 1,
            [&](std::uint32_t m, double h) { table.values[m] = h; });
  // sign symmetry makes the upper half an exact mirror
  const std::uint32_t full = static_cast<std::uint32_t>((1ull << pe.n) - 1);
  for (std::uint64_t m = 0; m < (1ull << (pe.n - 1)); ++m)
    table.values[full ^ m] = table.values[m];
  return table;
}

int bin_of(double r, std::size_t bins) {
  return std::min(static_cast<int>(r * static_cast<double>(bins)),
                  static_cast<int>(bins) - 1);
}

}  // namespace

double ParityExpansion::energy(std::uint32_t config) const {
  double h = constant;
  for (std::size_t t = 0; t < masks.size(); ++t) {
    const int minus = std::popcount(masks[t] & ~config);
    h += (minus & 1) ? -coeffs[t] : coeffs[t];
  }
  return h;
}

ParityExpansion parity_expansion(const Hypergraph& g) {
  check_mask_width(g.n);
  std::map<std::uint32_t, double> combined;
  double constant = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    std::uint32_t mask = 0;
    for (std::int32_t v : g.edge(e)) mask ^= 1u << v;
    if (mask == 0)
      constant -= 1.0;
    else
      combined[mask] -= 1.0;
  }
  return finish_expansion(g.n, constant, std::move(combined));
}

ParityExpansion parity_expansion(const MeanFieldInstance& mf) {
  check_mask_width(mf.n);
  const std::uint64_t total = static_cast<std::uint64_t>(mf.couplings.size());
  if (total > 20000000ull)
    throw ResourceError("mean-field parity expansion too large");
  const double scale =
      std::pow(static_cast<double>(mf.n), -(mf.k - 1) / 2.0);
  std::map<std::uint32_t, double> combined;
  double constant = 0.0;
  std::vector<int> digit(mf.k, 0);
  for (std::uint64_t flat = 0;;) {
    std::uint32_t mask = 0;
    for (int j = 0; j < mf.k; ++j) mask ^= 1u << digit[j];
    const double c = scale * mf.couplings[static_cast<Eigen::Index>(flat)];
    if (mask == 0)
      constant += c;
    else
      combined[mask] += c;
    if (++flat == total) break;
    int j = mf.k - 1;
    while (digit[j] == mf.n - 1) {
      digit[j] = 0;
      --j;
    }
    ++digit[j];
  }
  return finish_expansion(mf.n, constant, std::move(combined));
}

BruteResult brute_force_max(const Hypergraph& g) {
  if (g.n > 28) throw ResourceError("exhaustive scan limited to 28 spins");
  return brute_core(parity_expansion(g));
}

BruteResult brute_force_max(const MeanFieldInstance& mf) {
  if (mf.n > 20)
    throw ResourceError("exhaustive scan limited to 20 spins for dense couplings");
  return brute_core(parity_expansion(mf));
}

double EnergyTable::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

std::uint32_t EnergyTable::argmax_mask() const {
  return static_cast<std::uint32_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

EnergyTable build_energy_table(const Hypergraph& g) {
  if (g.n > 28) throw ResourceError("energy table limited to 28 spins");
  return table_core(parity_expansion(g));
}

EnergyTable build_energy_table(const MeanFieldInstance& mf) {
  if (mf.n > 20)
    throw ResourceError("energy table limited to 20 spins for dense couplings");
  return table_core(parity_expansion(mf));
}

OverlapSet OverlapSet::of(std::vector<double> vs) {
  if (vs.empty()) throw ValidationError("overlap set is empty");
  OverlapSet s;
  s.values = std::move(vs);
  return s;
}

OverlapSet OverlapSet::range(double lo, double hi) {
  if (!(lo <= hi)) throw ValidationError("overlap interval is empty");
  OverlapSet s;
  s.is_interval = true;
  s.lo = lo;
  s.hi = hi;
  return s;
}

bool OverlapSet::admits(double r) const {
  if (is_interval) return r >= lo - kSnapTol && r <= hi + kSnapTol;
  for (double v : values)
    if (std::abs(r - v) <= kSnapTol) return true;
  return false;
}

PairMax constrained_pair_max(const EnergyTable& table, const OverlapSet& set,
                             int threads) {
  const int n = table.n;
  if (n > 15) throw ResourceError("pair scan limited to 15 spins");
  std::vector<int> dists;
  for (int d = 0; d <= n; ++d)
    if (set.admits((n - 2.0 * d) / n)) dists.push_back(d);
  if (dists.empty())
    throw ValidationError("no feasible overlap in the admissible set");

  const std::uint32_t size = 1u << n;
  std::vector<std::vector<std::uint32_t>> by_pop(n + 1);
  for (std::uint32_t z = 0; z < size; ++z)
    by_pop[std::popcount(z)].push_back(z);

  struct Best {
    double v = -std::numeric_limits<double>::infinity();
    int d = 0;
    std::uint32_t x = 0;
    std::uint32_t y = 0;
  };
  // total order on candidates so the argmax is chunking-independent
  auto better = [](const Best& a, const Best& b) {
    if (a.v != b.v) return a.v > b.v;
    if (a.d != b.d) return a.d < b.d;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  };

  const std::size_t chunks = std::min<std::size_t>(size, 64);
  std::vector<Best> part(chunks);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        Best cur;
        for (std::uint32_t x = static_cast<std::uint32_t>(c); x < size;
             x += static_cast<std::uint32_t>(chunks)) {
          for (int d : dists) {
            for (std::uint32_t z : by_pop[d]) {
              const std::uint32_t y = x ^ z;
              Best cand{table.values[x] + table.values[y], d, x, y};
              if (better(cand, cur)) cur = cand;
            }
          }
        }
        part[c] = cur;
      },
      threads);

  Best best;
  for (const Best& cand : part)
    if (better(cand, best)) best = cand;

  PairMax out;
  out.value = best.v / n;
  out.overlap = (n - 2.0 * best.d) / n;
  out.first = best.x;
  out.second = best.y;
  return out;
}

namespace {

// Incremental single-flip state for a hypergraph: per-edge running product
// and, per vertex, the edges where it appears an odd number of times.
struct EdgeFlip {
  const Hypergraph* g = nullptr;
  std::vector<std::vector<std::int32_t>> odd_edges;
  std::vector<std::int8_t> prod;

  explicit EdgeFlip(const Hypergraph& graph) : g(&graph) {
    odd_edges.assign(g->n, {});
    std::vector<int> mult(g->n, 0);
    for (std::size_t e = 0; e < g->num_edges(); ++e) {
      for (std::int32_t v : g->edge(e)) ++mult[v];
      for (std::int32_t v : g->edge(e)) {
        if (mult[v] & 1)
          odd_edges[v].push_back(static_cast<std::int32_t>(e));
        mult[v] = 0;
      }
    }
  }

  double init(const SpinConfig& sigma) {
    prod.assign(g->num_edges(), 1);
    long long h = 0;
    for (std::size_t e = 0; e < g->num_edges(); ++e) {
      int p = 1;
      for (std::int32_t v : g->edge(e)) p *= sigma[v];
      prod[e] = static_cast<std::int8_t>(p);
      h -= p;
    }
    return static_cast<double>(h);
  }

  double delta(int v) const {
    long long acc = 0;
    for (std::int32_t e : odd_edges[v]) acc += prod[e];
    return 2.0 * static_cast<double>(acc);
  }

  void commit(int v) {
    for (std::int32_t e : odd_edges[v]) prod[e] = -prod[e];
  }
};

// Same protocol over a parity expansion (used for dense couplings).
struct TermFlip {
  const ParityExpansion* pe = nullptr;
  std::vector<double> signedc;

  explicit TermFlip(const ParityExpansion& expansion) : pe(&expansion) {}

  double init(const SpinConfig& sigma) {
    std::uint32_t config = 0;
    for (int i = 0; i < pe->n; ++i)
      if (sigma[i] > 0) config |= 1u << i;
    signedc.resize(pe->masks.size());
    double h = pe->constant;
    for (std::size_t t = 0; t < pe->masks.size(); ++t) {
      const int minus = std::popcount(pe->masks[t] & ~config);
      signedc[t] = (minus & 1) ? -pe->coeffs[t] : pe->coeffs[t];
      h += signedc[t];
    }
    return h;
  }

  double delta(int v) const {
    double acc = 0.0;
    for (std::int32_t t : pe->vertex_terms[v]) acc += signedc[t];
    return -2.0 * acc;
  }

  void commit(int v) {
    for (std::int32_t t : pe->vertex_terms[v]) signedc[t] = -signedc[t];
  }
};

void check_anneal_params(const AnnealParams& p) {
  if (p.flips_per_spin < 1) throw ValidationError("need at least one flip");
  if (p.restarts < 1) throw ValidationError("need at least one restart");
  if (!(p.t_start >= p.t_end) || !(p.t_end > 0.0))
    throw ValidationError("cooling needs t_start >= t_end > 0");
}

template <class Engine>
void run_restart(const Engine& base, int n, const AnnealParams& p,
                 std::uint64_t rseed, double& best_out, SpinConfig& cfg_out) {
  Engine eng = base;
  Rng rng(rseed);
  SpinConfig sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = rng.below(2) ? 1 : -1;
  double h = eng.init(sigma);
  double best = h;
  SpinConfig best_cfg = sigma;
  const long long total = p.flips_per_spin * n;
  const double factor =
      total > 1 ? std::pow(p.t_end / p.t_start,
                           1.0 / static_cast<double>(total - 1))
                : 1.0;
  double temp = p.t_start;
  for (long long step = 0; step < total; ++step, temp *= factor) {
    const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const double d = eng.delta(v);
    if (d >= 0.0 || rng.unit() < std::exp(d / temp)) {
      eng.commit(v);
      sigma[v] = -sigma[v];
      h += d;
      if (h > best) {
        best = h;
        best_cfg = sigma;
      }
    }
  }
  best_out = best;
  cfg_out = std::move(best_cfg);
}

template <class Engine>
SampleResult sample_core(const Engine& base, int n, double eta,
                         const AnnealParams& p, std::uint64_t seed,
                         int threads) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ValidationError("eta must lie in (0, 1)");
  check_anneal_params(p);
  std::vector<double> bests(p.restarts);
  std::vector<SpinConfig> cfgs(p.restarts);
  parallel_for(
      static_cast<std::size_t>(p.restarts),
      [&](std::size_t r) {
        run_restart(base, n, p, derive_seed(seed, "anneal", r), bests[r],
                    cfgs[r]);
      },
      threads);
  SampleResult out;
  out.best = *std::max_element(bests.begin(), bests.end());
  out.threshold = (1.0 - eta) * out.best;
  std::set<std::vector<int>> seen;
  for (int r = 0; r < p.restarts; ++r) {
    if (!(bests[r] >= out.threshold - 1e-12)) continue;
    std::vector<int> key(cfgs[r].data(), cfgs[r].data() + n);
    if (seen.insert(std::move(key)).second)
      out.configs.push_back(std::move(cfgs[r]));
  }
  return out;
}

}  // namespace

SampleResult near_optimal_sample(const Hypergraph& g, double eta,
                                 const AnnealParams& params,
                                 std::uint64_t seed, int threads) {
  validate_model_params(g.k, 0.0, g.n);
  EdgeFlip engine(g);
  return sample_core(engine, g.n, eta, params, seed, threads);
}

SampleResult near_optimal_sample(const MeanFieldInstance& mf, double eta,
                                 const AnnealParams& params,
                                 std::uint64_t seed, int threads) {
  ParityExpansion pe = parity_expansion(mf);
  TermFlip engine(pe);
  return sample_core(engine, mf.n, eta, params, seed, threads);
}

OverlapHistogram make_histogram(int num_bins, double threshold) {
  if (num_bins < 1) throw ValidationError("need at least one bin");
  OverlapHistogram h;
  h.threshold = threshold;
  h.edges.resize(num_bins + 1);
  for (int i = 0; i <= num_bins; ++i)
    h.edges[i] = static_cast<double>(i) / num_bins;
  h.counts.assign(num_bins, 0);
  return h;
}

void OverlapHistogram::add(double abs_overlap) {
  if (!(abs_overlap >= 0.0 && abs_overlap <= 1.0 + 1e-12))
    throw ValidationError("absolute overlap outside [0, 1]");
  ++counts[bin_of(std::min(abs_overlap, 1.0), counts.size())];
}

long long OverlapHistogram::pairs() const {
  long long total = 0;
  for (long long c : counts) total += c;
  return total;
}

std::string OverlapHistogram::csv_string() const {
  CsvTable t({"bin_lo", "bin_hi", "count"});
  for (std::size_t i = 0; i < counts.size(); ++i)
    t.add_row({fmt17(edges[i]), fmt17(edges[i + 1]),
               std::to_string(counts[i])});
  return t.to_string();
}

namespace {

// Pair scan over near-optimal sets with integer-count merge, so the result
// is identical for every thread count.
template <class OverlapAt>
void scan_pairs(std::size_t m, std::size_t bins, OverlapHistogram& hist,
                int threads, OverlapAt&& overlap_at) {
  const std::size_t chunks = std::min<std::size_t>(std::max<std::size_t>(m, 1), 128);
  std::vector<std::vector<long long>> local(
      chunks, std::vector<long long>(bins, 0));
  parallel_for(
      chunks,
      [&](std::size_t c) {
        auto& cnt = local[c];
        for (std::size_t i = c; i < m; i += chunks)
          for (std::size_t j = i + 1; j < m; ++j)
            ++cnt[bin_of(overlap_at(i, j), bins)];
      },
      threads);
  for (const auto& cnt : local)
    for (std::size_t b = 0; b < bins; ++b) hist.counts[b] += cnt[b];
}

template <class Source, class MaskOverlap, class CfgOverlap>
ScanResult scan_core(const Source& src, std::uint64_t instance_hash,
                     const ScanOptions& opt, MaskOverlap&& mask_overlap,
                     CfgOverlap&& cfg_overlap) {
  ScanResult out;
  out.exhaustive = opt.exhaustive;
  out.seed = opt.seed;
  out.instance_hash = instance_hash;
  if (opt.exhaustive) {
    EnergyTable table = build_energy_table(src);
    out.best = table.max_value();
    out.threshold = (1.0 - opt.eta) * out.best;
    std::vector<std::uint32_t> kept;
    for (std::uint64_t m = 0; m < table.values.size(); ++m)
      if (table.values[m] >= out.threshold - 1e-12)
        kept.push_back(static_cast<std::uint32_t>(m));
    if (kept.size() < 2)
      throw ValidationError("need at least two near-optimal configurations");
    if (kept.size() > 50000)
      throw ResourceError("near-optimal set too large for a pair scan");
    out.num_samples = kept.size();
    out.hist = make_histogram(opt.num_bins, out.threshold);
    scan_pairs(kept.size(), out.hist.counts.size(), out.hist, opt.threads,
               [&](std::size_t i, std::size_t j) {
                 return mask_overlap(kept[i], kept[j]);
               });
  } else {
    SampleResult samples =
        near_optimal_sample(src, opt.eta, opt.anneal, opt.seed, opt.threads);
    if (samples.configs.size() < 2)
      throw ValidationError("need at least two near-optimal configurations");
    out.best = samples.best;
    out.threshold = samples.threshold;
    out.num_samples = samples.configs.size();
    out.hist = make_histogram(opt.num_bins, out.threshold);
    scan_pairs(samples.configs.size(), out.hist.counts.size(), out.hist,
               opt.threads, [&](std::size_t i, std::size_t j) {
                 return cfg_overlap(samples.configs[i], samples.configs[j]);
               });
  }
  return out;
}

}  // namespace

ScanResult overlap_gap_scan(const Hypergraph& g, const ScanOptions& opt) {
  const int n = g.n;
  return scan_core(
      g, hash_hypergraph(g), opt,
      [n](std::uint32_t a, std::uint32_t b) {
        return std::abs(n - 2.0 * std::popcount(a ^ b)) / n;
      },
      [](const SpinConfig& a, const SpinConfig& b) {
        return std::abs(overlap(a, b));
      });
}

ScanResult overlap_gap_scan(const MeanFieldInstance& mf,
                            const ScanOptions& opt) {
  const int n = mf.n;
  return scan_core(
      mf, hash_mean_field(mf), opt,
      [n](std::uint32_t a, std::uint32_t b) {
        return std::abs(n - 2.0 * std::popcount(a ^ b)) / n;
      },
      [](const SpinConfig& a, const SpinConfig& b) {
        return std::abs(overlap(a, b));
      });
}

std::string ScanResult::sidecar_json() const {
  json j;
  j["best"] = best;
  j["threshold"] = threshold;
  j["num_samples"] = num_samples;
  j["pairs"] = hist.pairs();
  j["num_bins"] = hist.counts.size();
  j["exhaustive"] = exhaustive;
  j["instance_hash"] = instance_hash;
  j["seed"] = seed;
  return j.dump(2);
}

std::vector<DilutionRow> dilution_compare(int k, std::vector<double> lambdas,
                                          int n, std::uint64_t seed,
                                          const DilutionOptions& opt) {
  if (lambdas.empty()) throw ValidationError("need at least one dilution value");
  for (double l : lambdas) validate_model_params(k, l, n);
  if (opt.reps < 1) throw ValidationError("reps must be >= 1");
  if (opt.exact && n > 28)
    throw ResourceError("exact mode limited to 28 spins");
  check_anneal_params(opt.anneal);

  std::vector<double> ls = lambdas;
  std::sort(ls.begin(), ls.end());
  const std::size_t m = ls.size();
  std::vector<std::vector<double>> density(m,
                                           std::vector<double>(opt.reps, 0.0));
  parallel_for(
      static_cast<std::size_t>(opt.reps),
      [&](std::size_t r) {
        Rng rng(derive_seed(seed, "dilution", r));
        Hypergraph g;
        g.n = n;
        g.k = k;
        double prev = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double mean = (ls[j] - prev) * n;
          const long extra = mean > 0.0 ? rng.poisson(mean) : 0;
          for (long e = 0; e < extra; ++e)
            for (int s = 0; s < k; ++s)
              g.edge_data.push_back(
                  static_cast<std::int32_t>(rng.below(n)));
          prev = ls[j];
          if (opt.exact) {
            density[j][r] = brute_force_max(g).value / n;
          } else {
            SampleResult sr =
                near_optimal_sample(g, 0.5, opt.anneal,
                                    derive_seed(seed, "dilheur", r * 1024 + j),
                                    1);
            density[j][r] = sr.best / n;
          }
        }
      },
      opt.threads);

  std::vector<DilutionRow> rows;
  for (std::size_t j = 0; j < m; ++j) {
    DilutionRow row;
    row.lambda = ls[j];
    double mean = 0.0;
    for (double d : density[j]) mean += d;
    mean /= opt.reps;
    row.mean_density = mean;
    double var = 0.0;
    for (double d : density[j]) var += (d - mean) * (d - mean);
    row.se = opt.reps > 1
                 ? std::sqrt(var / (opt.reps * (opt.reps - 1.0)))
                 : 0.0;
    row.ratio = ls[j] > 0.0 ? mean / std::sqrt(ls[j])
                            : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ogp::oracle
