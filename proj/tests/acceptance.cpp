// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Seeds and sizes are pinned so that the output is reproducible.

#include "exodromy/exodromy.hpp"
#include "exodromy/random.hpp"
#include "exodromy/strat.hpp"
#include "exodromy/suites.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace exo;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr std::size_t kPretoposInstances = 400;
constexpr std::size_t kOpcompactInstances = 200;
constexpr std::size_t kReconstructionInstances = 300;
constexpr std::size_t kRandomLemmaInstances = 60;

struct Outcome {
  bool pass = true;
  std::string detail;
};

ProCatBounds small_bounds() {
  ProCatBounds b;
  b.max_objects = 2;
  b.max_hom = 3;
  b.max_levels = 2;
  b.max_carrier = 3;
  return b;
}

Outcome from_reports(const std::vector<SuiteReport>& reports) {
  Outcome o;
  std::size_t instances = 0, checks = 0, skipped = 0;
  for (const auto& r : reports) {
    instances += r.instances;
    checks += r.checks;
    skipped += r.skipped;
    if (!r.ok()) {
      o.pass = false;
      o.detail += render_text({r});
    }
  }
  std::ostringstream s;
  s << "instances " << instances << ", checks " << checks << ", skipped " << skipped;
  if (!o.pass) s << '\n' << o.detail;
  o.detail = s.str();
  return o;
}

Outcome pretopos_axioms() {
  auto r = pretopos_suite_random(kSeed, kPretoposInstances, small_bounds());
  auto o = from_reports({r});
  if (r.instances < 100) o.pass = false;
  return o;
}

Outcome elementary_lemmas() {
  std::vector<SuiteReport> reports;
  for (const auto& ex : canned_examples()) {
    auto r = lemmas_suite(ex.presentation);
    r.name = "lemmas " + ex.name;
    reports.push_back(r);
  }
  Rng rng(kSeed + 1);
  for (std::size_t i = 0; i < kRandomLemmaInstances; ++i) {
    auto base = std::make_shared<const ProCat>(random_procat(rng, small_bounds()));
    auto r = lemmas_suite(all_points(base));
    r.name = "lemmas random " + std::to_string(i);
    reports.push_back(r);
  }
  return from_reports(reports);
}

Outcome opcompactness() {
  ChainBounds chain;
  chain.max_length = 5;
  chain.max_size = 4;
  auto r = opcompact_suite_random(kSeed + 2, kOpcompactInstances, small_bounds(), chain);
  auto o = from_reports({r});
  if (r.instances < 50) o.pass = false;
  return o;
}

Outcome psi_coinitiality() {
  std::vector<SuiteReport> reports;
  std::size_t examples = 0;
  for (const auto& ex : canned_examples()) {
    if (ex.presentation.fibre_count() < 2) continue;
    ++examples;
    SuiteReport r;
    r.name = "psi " + ex.name;
    r.instances = 1;
    try {
      auto ctx = make_context(ex.presentation);
      auto psi = psi_coinitiality_check(ctx, 12);
      r.absorb(psi.report, ex.name);
      if (psi.nodes == 0) r.fail(ex.name, "no nodes inside the window");
    } catch (const std::exception& e) {
      r.fail(ex.name, e.what());
    }
    reports.push_back(r);
  }
  auto o = from_reports(reports);
  if (examples == 0) {
    o.pass = false;
    o.detail += "; no canned example has two fibre points";
  }
  return o;
}

Outcome exodromy_round_trips() {
  std::vector<SuiteReport> reports;
  for (const auto& ex : canned_examples()) {
    auto r = exodromy_suite(ex.presentation);
    r.name = "exodromy " + ex.name;
    reports.push_back(r);
  }
  return from_reports(reports);
}

Outcome reconstruction() {
  SuiteReport r;
  r.name = "reconstruction";
  Rng rng(kSeed + 3);
  for (std::size_t i = 0; i < kReconstructionInstances; ++i) {
    ++r.instances;
    try {
      r.absorb(reconstruction_check(random_procat(rng, small_bounds())), "random " + std::to_string(i));
    } catch (const std::exception& e) {
      r.fail("random " + std::to_string(i), e.what());
    }
  }
  for (const auto& ex : canned_examples()) {
    ++r.instances;
    r.absorb(reconstruction_check(*ex.presentation.base, ex.presentation.generator_bound), ex.name);
  }
  auto bs3 = fundamental_category(canned_example("bs3")->presentation);
  if (bs3.category->level(0).hom_size(0, 0) != 6) r.fail("bs3", "reconstructed hom does not have 6 elements");
  auto two = fundamental_category(canned_example("two-curves")->presentation);
  const auto& c = two.category->level(0);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      if (c.hom_size(x, y) != 1) r.fail("two-curves", "reconstructed category is not the codiscrete preorder");
  return from_reports({r});
}

Outcome classical_galois() {
  Outcome o;
  auto ctx = make_context(canned_example("bs3")->presentation);
  std::vector<Table> action;
  for (const auto& p : s3_elements()) action.push_back(p);
  auto f = blank_functor(ctx.pi1_ptr(), 0, {FinSet(3)});
  f.actions[0] = action;
  auto t = realize(ctx, f);
  const auto cover = t.cover.object.total_size();
  const auto quotient = t.quotient.total_size();
  o.pass = cover == 18 && quotient == 3 && isomorphic(ev(ctx, t.quotient), f);
  o.detail = "cover " + std::to_string(cover) + ", quotient " + std::to_string(quotient);
  return o;
}

std::string determinism_run() {
  std::vector<SuiteReport> reports;
  reports.push_back(pretopos_suite_random(kSeed, 20, small_bounds()));
  reports.push_back(opcompact_suite_random(kSeed + 2, 20, small_bounds()));
  for (auto& r : run_suites(canned_example("z2-exit")->presentation, "all", kSeed)) reports.push_back(r);
  return render_text(reports);
}

Outcome determinism() {
  auto first = determinism_run();
  auto second = determinism_run();
  Outcome o;
  o.pass = first == second;
  o.detail = std::to_string(first.size()) + " bytes per run";
  return o;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 pretopos axioms", pretopos_axioms},
      {"2 elementary lemmas", elementary_lemmas},
      {"3 opcompactness", opcompactness},
      {"4 psi coinitiality", psi_coinitiality},
      {"5 exodromy round trips", exodromy_round_trips},
      {"6 reconstruction", reconstruction},
      {"7 classical galois (BS3 cosets)", classical_galois},
      {"8 determinism", determinism},
  };
  bool all = true;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << "; " << ms << " ms)" << std::endl;
  }
  return all ? 0 : 1;
}
