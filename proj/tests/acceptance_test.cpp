// Copyright 2026 The AGE Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "agekit/agekit.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace agekit;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("FAILED " + what);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

template <class Fn>
ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kEmptyReport;  // sentinel: nothing thrown
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t* n_files) {
  std::set<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) fa.insert(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) fb.insert(fs::relative(e.path(), b));
  }
  *n_files = fa.size();
  if (fa != fb) return false;
  for (const auto& rel : fa) {
    if (slurp(a / rel) != slurp(b / rel)) return false;
  }
  return true;
}

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// ---------------------------------------------------------------------------

Outcome ac1_age_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 50)(rng);
    const auto k = std::uniform_int_distribution<Eigen::Index>(2, 20)(rng);
    PosteriorMatrix pc = testing::random_posteriors(rng, n, k);
    PosteriorMatrix pd = testing::random_posteriors(rng, n, k);
    const double want = oracle::age(oracle::to_grid(pc.values), oracle::to_grid(pd.values));
    worst = std::max(worst, std::abs(age(pc, pd).value - want));
  }
  o.require(worst < 1e-12, "max diff < 1e-12");
  o.note(fmt("100 pairs, max |diff| = %.3g", worst));
  return o;
}

Outcome ac2_identities() {
  Outcome o;
  std::mt19937_64 rng(102);
  double worst_uniform = 0.0, worst_self = 0.0, worst_gibbs = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 50)(rng);
    const auto k = std::uniform_int_distribution<Eigen::Index>(2, 20)(rng);
    PosteriorMatrix p = testing::random_posteriors(rng, n, k);
    PosteriorMatrix u{Matrix::Constant(n, k, 1.0 / static_cast<double>(k))};
    worst_uniform = std::max(worst_uniform, std::abs(age(p, u).value - std::log(static_cast<double>(k))));
    worst_self = std::max(worst_self, std::abs(age(p, p).value - entropy_confidence(p).value));
  }
  for (int t = 0; t < 100; ++t) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(1, 50)(rng);
    const auto k = std::uniform_int_distribution<Eigen::Index>(2, 20)(rng);
    PosteriorMatrix p = testing::random_posteriors(rng, n, k);
    PosteriorMatrix q = testing::random_posteriors(rng, n, k);
    worst_gibbs = std::max(worst_gibbs, entropy_confidence(p).value - age(p, q).value);
  }
  o.require(worst_uniform <= 1e-12, "age(P,uniform) = ln I within 1e-12");
  o.require(worst_self <= 1e-9, "age(P,P) = entropy within 1e-9");
  o.require(worst_gibbs <= 1e-9, "Gibbs inequality");
  o.note(fmt("ln I diff %.2g, self diff %.2g, max H(P)-age(P,Q) %.3g", worst_uniform, worst_self,
             worst_gibbs));
  return o;
}

Outcome ac3_forward_oracle() {
  Outcome o;
  std::mt19937_64 rng(103);
  AcousticModel m = oracle::random_model(rng, {24, 20, 16, 9}, Activation::kSigmoid, 8, 1, 1);
  FeatureMatrix f{testing::random_matrix(rng, 40, 8), FeatureKind::kFbank, 10.0};
  PosteriorMatrix p = forward(m, f);
  oracle::Grid want = oracle::forward(m, oracle::to_grid(splice(f, 1, 1).values));
  double diff = 0.0, rowsum = 0.0;
  for (Eigen::Index r = 0; r < p.frames(); ++r) {
    rowsum = std::max(rowsum, std::abs(p.values.row(r).sum() - 1.0));
    for (Eigen::Index c = 0; c < p.classes(); ++c) {
      diff = std::max(diff, std::abs(p.values(r, c) - want[r][c]));
    }
  }
  AcousticModel shifted = m;
  shifted.layers.back().bias.array() += 123.25;
  const double shift = (forward(shifted, f).values - p.values).cwiseAbs().maxCoeff();
  o.require(diff < 1e-9, "oracle diff < 1e-9");
  o.require(rowsum <= 1e-9, "row sums within 1e-9");
  o.require(shift <= 1e-12, "logit shift within 1e-12");
  o.note(fmt("3-layer diff %.2g, row-sum err %.2g, shift diff %.2g", diff, rowsum, shift));
  return o;
}

Outcome ac4_gradient_check() {
  Outcome o;
  std::mt19937_64 rng(104);
  const Eigen::Index n = 30;
  FeatureMatrix f{testing::random_matrix(rng, n, 5), FeatureKind::kFbank, 10.0};
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = std::uniform_int_distribution<int>(0, 3)(rng);
  ToyArchitecture arch;
  arch.hidden_dims = {8, 6};
  arch.left_context = 1;
  arch.right_context = 1;
  arch.n_classes = 4;
  // A few training steps move the parameters off the initialization.
  AcousticModel m = train_toy(f, labels, arch, {0.5, 5, 7});
  const double rel = oracle::gradient_check(m, splice(f, 1, 1).values, labels, rng, 10, 1e-5);
  o.require(rel < 1e-6, "relative error < 1e-6");
  o.note(fmt("10 parameters, max relative error %.3g", rel));
  return o;
}

Outcome ac5_logistic_fit() {
  Outcome o;
  auto curve = [](double a, double b, int n, double lo, double hi, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::pair<std::vector<double>, std::vector<double>> d;
    for (int i = 0; i < n; ++i) {
      const double m = lo + (hi - lo) * i / (n - 1);
      double w = 100.0 / (1.0 + std::exp(a * m + b));
      if (sigma > 0.0) w = std::max(0.0, w + sigma * g(rng));
      d.first.push_back(m);
      d.second.push_back(w);
    }
    return d;
  };
  auto exact = curve(1.5, -4.0, 30, 0.0, 6.0, 0.0, 0);
  LogisticFit fe = fit_logistic_detailed(exact.first, exact.second);
  const double exact_err = std::max(std::abs(fe.params.a - 1.5), std::abs(fe.params.b + 4.0));
  o.require(exact_err <= 1e-6, "exact recovery within 1e-6");

  auto noisy = curve(1.5, -4.0, 50, 0.5, 5.0, 1.0, 2024);
  LogisticFit fn = fit_logistic_detailed(noisy.first, noisy.second);
  const double rel_a = std::abs(fn.params.a - 1.5) / 1.5;
  o.require(rel_a <= 0.05, "noisy a within 5%");

  std::mt19937_64 rng(105);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> uni(0.0, 100.0);
  int worse = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> m(25), w(25);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = g(rng);
      w[i] = t % 2 ? uni(rng) : std::clamp(50.0 - 20.0 * m[i] + 10.0 * g(rng), 0.0, 120.0);
    }
    LogisticFit f = fit_logistic_detailed(m, w);
    worse += f.loss > f.initial_loss;
  }
  worse += fe.loss > fe.initial_loss;
  worse += fn.loss > fn.initial_loss;
  o.require(worse == 0, "fitted loss <= initial loss");
  o.note(fmt("exact err %.2g, noisy a=%.4f (%.2f%%), %d/202 fits worse than start", exact_err,
             fn.params.a, 100.0 * rel_a, worse));
  return o;
}

Outcome ac6_pearson() {
  Outcome o;
  using V = std::vector<double>;
  std::mt19937_64 rng(106);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    V x(30), y(30);
    const double slope = t % 2 ? 2.5 : -0.7;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = slope * x[i] + 4.0;
    }
    worst = std::max(worst, std::abs(std::abs(pearson(x, y)) - 1.0));
    worst = std::max(worst, std::abs(pearson(x, y) - (slope > 0 ? 1.0 : -1.0)));
  }
  const double three = pearson(V{1, 2, 3}, V{1, 3, 2});
  const ErrorCode flat = error_code_of([] { pearson(V{2, 2, 2, 2}, V{1, 2, 3, 4}); });
  o.require(worst <= 1e-12, "affine cases +-1 within 1e-12");
  o.require(std::abs(three - 0.5) <= 1e-15, "3-point case = 0.5");
  o.require(flat == ErrorCode::kUndefinedCorrelation, "zero variance raises");
  o.note(fmt("affine err %.2g, 3-point %.17g, zero variance -> %s", worst, three,
             std::string(to_string(flat)).c_str()));
  return o;
}

Outcome ac7_mixing() {
  Outcome o;
  std::mt19937_64 rng(107);
  const Waveform clean = synthesize_utterance(rng, 16000).audio;
  const Waveform noise = synthesize_noise(rng, 16000, 10.0);
  double worst = 0.0, slowest = 0.0;
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0}) {
    const auto t0 = Clock::now();
    MixComponents parts = mix_components(clean, noise, snr, 12345);
    Waveform mixed = mix_at_snr(clean, noise, snr, 12345);
    slowest = std::max(slowest, seconds_since(t0));
    long double pc = 0, pn = 0, drift = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      pc += static_cast<long double>(clean.samples[i]) * clean.samples[i];
      pn += static_cast<long double>(parts.scaled_noise.samples[i]) * parts.scaled_noise.samples[i];
      drift = std::max<long double>(
          drift, std::abs(mixed.samples[i] - clean.samples[i] - parts.scaled_noise.samples[i]));
    }
    const double got = static_cast<double>(10.0L * std::log10(pc / pn));
    worst = std::max(worst, std::abs(got - snr));
    o.require(drift <= 1e-15, "mix = clean + scaled noise");
  }
  o.require(worst <= 1e-9, "SNR within 1e-9 dB");
  o.require(slowest < 1.0, "runtime < 1 s per pair");
  o.note(fmt("%zu-sample pair, max SNR err %.3g dB, slowest mix %.4f s", clean.size(), worst, slowest));
  return o;
}

Outcome ac8_stoi() {
  Outcome o;
  auto pair = [] {
    std::mt19937_64 rng(2024);
    Waveform speech = synthesize_utterance(rng, 16000).audio;
    Waveform noise = testing::white_noise(rng, 0.1, 16000, speech.size());
    return std::make_pair(speech, noise);
  };
  auto [speech, noise] = pair();
  const double self = stoi(speech, speech).value;
  Waveform scaled = speech;
  for (double& v : scaled.samples) v *= 0.5;
  const double scale = stoi(speech, scaled).value;
  const double vs_noise = stoi(speech, noise).value;
  auto [speech2, noise2] = pair();
  const double again = stoi(speech2, noise2).value;
  o.require(self >= 0.999, "stoi(x,x) >= 0.999");
  o.require(scale >= 0.999, "scale invariance >= 0.999");
  o.require(vs_noise < 0.35, "noise vs speech < 0.35");
  o.require(again == vs_noise, "bit-identical rerun");
  o.note(fmt("self %.6f, x0.5 %.6f, noise %.6f, rerun identical %s", self, scale, vs_noise,
             again == vs_noise ? "yes" : "no"));
  return o;
}

struct FixtureRun {
  FixtureResult fixture;
  std::vector<ScoreRow> rows;
};

Outcome ac9_end_to_end(const fs::path& work, FixtureRun* run) {
  Outcome o;
  const auto t0 = Clock::now();
  const fs::path dir = work / "fixture_lib";
  fs::remove_all(dir);
  FixtureConfig cfg;  // 20 utterances x {-5, 0, 5, 10, 15, 20} dB, seed 1
  run->fixture = make_fixture_corpus(dir, cfg);
  const double t_fixture = seconds_since(t0);

  const auto entries = load_manifest(run->fixture.manifest_path);
  const AcousticModel model = load_model(run->fixture.model_path);
  RunConfig rc;
  rc.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  BatchResult res = score_corpus(entries, &model, rc);
  run->rows = res.rows;
  GroupedReport all = correlate_by_group(res.rows, std::nullopt);
  const double total = seconds_since(t0);

  std::map<double, std::pair<double, int>> by_snr;
  for (const ScoreRow& r : res.rows) {
    auto& acc = by_snr[std::stod(r.tags.at("snr_db"))];
    acc.first += r.values.at("age");
    acc.second += 1;
  }
  bool monotone = true;
  double previous = INFINITY;
  std::string means;
  for (const auto& [snr, acc] : by_snr) {
    const double mean = acc.first / acc.second;
    monotone = monotone && mean <= previous;
    previous = mean;
    means += fmt("%s%g:%.3f", means.empty() ? "" : " ", snr, mean);
  }
  const auto& reports = all.groups.at("all");
  const double rho_age = reports.at("age").rho_magnitude;
  const double rho_stoi = reports.at("stoi").rho_magnitude;
  const double rho_ent = reports.at("entropy").rho_magnitude;

  o.require(entries.size() == 120 && res.rows.size() == 120, "120 scored rows");
  o.require(monotone, "per-SNR mean AGE non-increasing");
  o.require(rho_age >= 0.85, "AGE rho >= 0.85");
  o.require(rho_age >= rho_stoi, "AGE rho >= STOI rho");
  o.require(total < 60.0, "runtime < 60 s");
  o.note(fmt("rows %zu, skipped %zu; mean AGE by SNR [%s]; rho AGE %.3f, entropy %.3f, STOI %.3f; "
             "fixture %.1f s, total %.1f s",
             res.rows.size(), res.skipped.size(), means.c_str(), rho_age, rho_ent, rho_stoi,
             t_fixture, total));
  return o;
}

Outcome ac10_determinism(const fs::path& work, const fs::path& cli, const FixtureRun& lib) {
  Outcome o;
  if (cli.empty() || !fs::exists(cli)) {
    o.require(false, "CLI binary available");
    return o;
  }
  // Fixture generation through the CLI, twice, compared with each other and
  // with the library run.
  const fs::path a = work / "fixture_cli_a";
  const fs::path b = work / "fixture_cli_b";
  fs::remove_all(a);
  fs::remove_all(b);
  for (const auto& d : {a, b}) {
    const int rc = shell(quote(cli) + " fixture --out " + quote(d) +
                         " --seed 1 --snrs -5,0,5,10,15,20 --utts 20");
    o.require(rc == 0, "fixture exit code 0");
  }
  std::size_t n_files = 0, n_lib = 0;
  o.require(same_tree(a, b, &n_files), "CLI fixtures byte-identical");
  o.require(same_tree(a, lib.fixture.manifest_path.parent_path(), &n_lib), "CLI fixture equals library fixture");

  // Scoring with 1 and 8 workers.
  const fs::path manifest = a / "manifest.csv";
  const fs::path model = a / "model.json";
  std::vector<std::vector<ScoreRow>> results;
  for (int workers : {1, 8}) {
    const fs::path out = work / ("score_w" + std::to_string(workers));
    fs::remove_all(out);
    const int rc = shell(quote(cli) + " score --manifest " + quote(manifest) + " --model " +
                         quote(model) + " --measures age,entropy,stoi --out " + quote(out) +
                         " --workers " + std::to_string(workers) + " --group-by snr_db");
    o.require(rc == 0, "score exit code 0");
    results.push_back(load_scores_csv(out / "scores.csv"));
  }
  auto as_set = [](std::vector<ScoreRow> rows) {
    std::map<std::string, ScoreRow> m;
    for (auto& r : rows) m[r.utt_id] = std::move(r);
    return m;
  };
  const auto s1 = as_set(results[0]);
  const auto s8 = as_set(results[1]);
  o.require(s1.size() == 120 && s1 == s8, "workers 1 and 8 give identical rows");
  o.require(slurp(work / "score_w1" / "report.json") == slurp(work / "score_w8" / "report.json"),
            "reports byte-identical");
  o.note(fmt("fixture files compared: %zu; scored rows: %zu vs %zu", n_files, s1.size(), s8.size()));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agekit acceptance suite"};
  std::string workdir = (fs::temp_directory_path() / "agekit_acceptance").string();
  std::string cli;
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--cli", cli, "Path to the agekit executable");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  int failures = 0;
  auto report = [&](const char* id, const char* title, const std::function<Outcome()>& fn) {
    Outcome out;
    const auto t0 = Clock::now();
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failures += out.pass ? 0 : 1;
    std::printf("[%s] %s %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", id, title, seconds_since(t0),
                out.detail.c_str());
    std::fflush(stdout);
  };

  FixtureRun lib;
  report("AC1", "AGE oracle equivalence", ac1_age_oracle);
  report("AC2", "analytic identities", ac2_identities);
  report("AC3", "forward-pass oracle", ac3_forward_oracle);
  report("AC4", "gradient check", ac4_gradient_check);
  report("AC5", "logistic fit recovery", ac5_logistic_fit);
  report("AC6", "Pearson correlation", ac6_pearson);
  report("AC7", "SNR mixing", ac7_mixing);
  report("AC8", "STOI sanity", ac8_stoi);
  report("AC9", "end-to-end fixture correlation", [&] { return ac9_end_to_end(workdir, &lib); });
  report("AC10", "determinism and order independence",
         [&] { return ac10_determinism(workdir, cli, lib); });

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
