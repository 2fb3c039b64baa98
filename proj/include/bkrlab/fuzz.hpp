#pragma once

// Randomized checking. Every instance is a complete scenario document built
// from mix_seed(seed, instance), so a violating instance is saved as-is and
// replays with `bkrlab run`.

#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bkrlab/scenario.hpp"

namespace bkr {

struct FuzzConfig {
  std::uint64_t seed = 0;
  std::size_t instances = 200;
  std::size_t n_min = 1, n_max = 4;
  std::size_t k_min = 2, k_max = 3;
  std::vector<double> values{0.0, 0.5, 1.0, 1.5, 2.0};
  double zero_label_p = 0.2;
  std::vector<std::string> evaluators{"bkr", "kss", "a", "b", "c", "d", "e", "a_dual", "b_dual", "c_dual",
                                      "d_dual", "e_dual", "mfold", "pqd", "st-max", "lo"};
  std::string repro_dir;
};

struct FuzzSummary {
  std::string name;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::size_t worst_instance = 0;
};

struct FuzzResult {
  std::vector<FuzzSummary> summaries;
  std::vector<std::string> repro_files;
  std::size_t violations() const {
    std::size_t v = 0;
    for (const auto& s : summaries) v += s.violations;
    return v;
  }
};

namespace detail {

inline FuzzConfig parse_fuzz_body(const json& doc) {
  const cfg::Node root{&doc, ""};
  if (!doc.is_object()) root.fail("expected a JSON object at top level");
  const auto f = root.at("fuzz");
  FuzzConfig c;
  c.seed = root.uint_or("seed", 0);
  c.instances = f.uint_or("instances", c.instances);
  if (f.has("n")) {
    const auto r = f.at("n").uints();
    if (r.size() != 2 || r[0] < 1 || r[0] > r[1] || r[1] > 5)
      f.at("n").fail("expected [lo, hi] with 1 <= lo <= hi <= 5");
    c.n_min = r[0], c.n_max = r[1];
  }
  if (f.has("k")) {
    const auto r = f.at("k").uints();
    if (r.size() != 2 || r[0] < 1 || r[0] > r[1] || r[1] > 4)
      f.at("k").fail("expected [lo, hi] with 1 <= lo <= hi <= 4");
    c.k_min = r[0], c.k_max = r[1];
  }
  if (f.has("values")) {
    c.values = f.at("values").numbers();
    if (c.values.empty()) f.at("values").fail("need at least one value");
    for (double v : c.values)
      if (!(v >= 0.0) || !std::isfinite(v)) f.at("values").fail("values must be finite and non-negative");
    std::sort(c.values.begin(), c.values.end());
  }
  c.zero_label_p = f.number_or("zero_label_p", c.zero_label_p);
  if (f.has("evaluators")) {
    c.evaluators.clear();
    const auto ev = f.at("evaluators");
    static const std::vector<std::string> known = FuzzConfig{}.evaluators;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const auto name = ev.at(i).str();
      if (std::find(known.begin(), known.end(), name) == known.end()) ev.at(i).fail("cannot fuzz '" + name + "'");
      c.evaluators.push_back(name);
    }
  }
  c.repro_dir = f.str_or("repro_dir", "");
  return c;
}

}  // namespace detail

inline FuzzConfig parse_fuzz_config(const json& doc, const std::string& source) {
  try {
    return detail::parse_fuzz_body(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

namespace detail {

class InstanceBuilder {
 public:
  InstanceBuilder(const FuzzConfig& c, std::uint64_t seed) : c_(c), rng_(seed) {
    n_ = pick(c.n_min, c.n_max);
    for (std::size_t i = 0; i < n_; ++i) sizes_.push_back(pick(c.k_min, c.k_max));
    points_ = 1;
    for (auto s : sizes_) points_ *= s;
  }

  json space() {
    json coords = json::array();
    for (auto k : sizes_) {
      std::vector<double> w(k), labels(k);
      for (std::size_t v = 0; v < k; ++v) {
        w[v] = 0.05 + unit_uniform(rng_);
        labels[v] = static_cast<double>(v);
      }
      if (k >= 2 && unit_uniform(rng_) < c_.zero_label_p) w[pick(0, k - 1)] = 0.0;
      double s = 0.0;
      for (double x : w) s += x;
      for (double& x : w) x /= s;
      coords.push_back({{"labels", labels}, {"marginal", w}});
    }
    return {{"coords", coords}};
  }

  json entry(const std::string& type) {
    json e{{"type", type}};
    if (type == "bkr" || type == "kss") {
      e["A"] = event();
      e["B"] = event();
    } else if (type == "b" || type == "e" || type == "b_dual" || type == "e_dual") {
      e["f"] = table(all_mask());
      e["g"] = table(all_mask());
    } else if (type == "mfold") {
      json fams = json::array();
      const auto m = pick(2, 3);
      for (std::size_t i = 0; i < m; ++i) fams.push_back(family(false));
      e["families"] = fams;
    } else if (type == "pqd" || type == "st-max") {
      json H = json::array(), fns = json::array();
      const auto m = pick(2, 3);
      for (std::size_t i = 0; i < m; ++i) {
        H.push_back(coords_of(random_mask()));
        fns.push_back(increasing());
      }
      e["H"] = H;
      e["functions"] = fns;
    } else {
      const bool mono = type == "lo";
      e["F"] = family(mono);
      e["G"] = family(mono);
    }
    return e;
  }

 private:
  std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  double value() { return c_.values[pick(0, c_.values.size() - 1)]; }
  std::uint32_t all_mask() const { return (1u << n_) - 1; }
  std::uint32_t random_mask() {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < n_; ++i)
      if (unit_uniform(rng_) < 0.4) m |= 1u << i;
    return m;
  }
  static json coords_of(std::uint32_t m) {
    json a = json::array();
    for (std::size_t i = 0; m >> i; ++i)
      if (m >> i & 1u) a.push_back(i);
    return a;
  }
  std::size_t digit(std::size_t idx, std::size_t i) const {
    for (std::size_t j = n_; j-- > i + 1;) idx /= sizes_[j];
    return idx % sizes_[i];
  }

  json event() {
    json idx = json::array();
    const double density = 0.2 + 0.6 * unit_uniform(rng_);
    for (std::size_t i = 0; i < points_; ++i)
      if (unit_uniform(rng_) < density) idx.push_back(i);
    return {{"indices", idx}};
  }

  /// Random table depending only on the coordinates in `dep`.
  json table(std::uint32_t dep) {
    std::map<std::vector<std::size_t>, double> proj;
    std::vector<double> v(points_);
    for (std::size_t x = 0; x < points_; ++x) {
      std::vector<std::size_t> key;
      for (std::size_t i = 0; i < n_; ++i)
        if (dep >> i & 1u) key.push_back(digit(x, i));
      auto it = proj.find(key);
      if (it == proj.end()) it = proj.emplace(key, value()).first;
      v[x] = it->second;
    }
    return {{"table", v}};
  }

  /// Sum of nondecreasing per-coordinate terms over `dep`.
  json increasing(std::uint32_t dep = ~0u) {
    std::vector<std::vector<double>> terms(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      std::vector<double> t(sizes_[i]);
      for (auto& x : t) x = value();
      std::sort(t.begin(), t.end());
      terms[i] = (dep >> i & 1u) ? t : std::vector<double>(sizes_[i], 0.0);
    }
    std::vector<double> v(points_);
    for (std::size_t x = 0; x < points_; ++x)
      for (std::size_t i = 0; i < n_; ++i) v[x] += terms[i][digit(x, i)];
    return {{"table", v}};
  }

  json family(bool mono) {
    json members = json::array();
    const auto m = pick(1, 3);
    for (std::size_t a = 0; a < m; ++a) {
      const auto dep = random_mask();
      json mem = mono ? increasing(dep) : table(dep);
      mem["dep"] = coords_of(dep);
      members.push_back(mem);
    }
    return {{"members", members}};
  }

  const FuzzConfig& c_;
  std::mt19937_64 rng_;
  std::size_t n_ = 0, points_ = 1;
  std::vector<std::size_t> sizes_;
};

}  // namespace detail

/// Self-contained scenario document for one fuzz instance.
inline json fuzz_instance(const FuzzConfig& c, std::size_t instance) {
  const auto seed = mix_seed(c.seed, instance);
  detail::InstanceBuilder b(c, seed);
  json doc{{"description", "fuzz instance " + std::to_string(instance) + " of seed " + std::to_string(c.seed)},
           {"seed", seed},
           {"mode", "exact"}};
  doc["space"] = b.space();
  json evs = json::array();
  for (const auto& t : c.evaluators) evs.push_back(b.entry(t));
  doc["evaluators"] = evs;
  return doc;
}

inline FuzzResult run_fuzz(const FuzzConfig& c) {
  struct Outcome {
    ReportList reports;
    bool violated = false;
  };
  auto outcomes = parallel_map<Outcome>(c.instances, [&](std::size_t i) {
    const json doc = fuzz_instance(c, i);
    const auto sc = load_scenario(doc, "fuzz[" + std::to_string(i) + "]");
    Outcome o;
    for (const auto& e : sc.entries)
      for (auto& r : e.run()) o.reports.push_back(std::move(r));
    o.violated = !all_hold(o.reports);
    return o;
  });

  FuzzResult res;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (const auto& r : outcomes[i].reports) {
      if (r.observation) continue;
      auto [it, fresh] = slot.emplace(r.name, res.summaries.size());
      if (fresh) res.summaries.push_back({r.name});
      auto& s = res.summaries[it->second];
      ++s.checked;
      if (!r.holds) ++s.violations;
      if (r.slack < s.min_slack) {
        s.min_slack = r.slack;
        s.worst_instance = i;
      }
    }
    if (outcomes[i].violated && !c.repro_dir.empty()) {
      std::filesystem::create_directories(c.repro_dir);
      const auto path = (std::filesystem::path(c.repro_dir) /
                         ("repro_" + std::to_string(c.seed) + "_" + std::to_string(i) + ".cfg"))
                            .string();
      std::ofstream(path) << fuzz_instance(c, i).dump(2) << "\n";
      res.repro_files.push_back(path);
    }
  }
  return res;
}

inline void write_fuzz_summary(std::ostream& os, const FuzzConfig& c, const FuzzResult& r) {
  os << "| name | checked | violations | min slack | worst instance |\n";
  os << "|---|---|---|---|---|\n";
  for (const auto& s : r.summaries)
    os << "| " << s.name << " | " << s.checked << " | " << s.violations << " | " << fmt17(s.min_slack) << " | "
       << s.worst_instance << " |\n";
  os << "\n" << c.instances << " instances (seed " << c.seed << "), " << r.violations() << " violations.\n";
  for (const auto& f : r.repro_files) os << "repro: " << f << "\n";
}

}  // namespace bkr
