// exodromy: validate interchange documents, compute fundamental categories,
// realize functors as objects, and run the property suites.

#include "exodromy/exodromy.hpp"
#include "exodromy/io.hpp"
#include "exodromy/strat.hpp"
#include "exodromy/suites.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace exo;

enum Exit : int { ok = 0, semantic = 1, usage = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string name_of(const FinSet& s, std::size_t i) {
  return s.labels.empty() ? std::to_string(i) : s.labels[i];
}

std::string join(const std::vector<std::size_t>& v) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  out << ']';
  return out.str();
}

io::PresentationSource load_presentation(const std::string& path, const std::vector<std::size_t>& points,
                                         std::optional<std::size_t> bound) {
  auto doc = read_document(path);
  io::PresentationSource src;
  if (auto* p = std::get_if<io::PresentationSource>(&doc.value)) {
    src = *p;
  } else if (auto* c = std::get_if<ProCat>(&doc.value)) {
    src.presentation = all_points(std::make_shared<const ProCat>(*c));
  } else if (auto* s = std::get_if<StrataSpec>(&doc.value)) {
    src.strata = *s;
    src.presentation = all_points(std::make_shared<const ProCat>(build_strata(*s)));
  } else {
    throw UsageError(path + ": expected a presentation, procat or strata document, found " + doc.kind);
  }
  if (!points.empty()) src.presentation.fibre_points = points;
  if (bound) src.presentation.generator_bound = *bound;
  auto report = validate_presentation(src.presentation);
  if (!report.ok()) throw ValidationError("presentation", {}, "invalid presentation:\n" + report.to_string());
  return src;
}

// ------------------------------------------------------------------ validate

int cmd_validate(const std::string& path, const std::string& format) {
  auto doc = read_document(path);
  ValidationReport report;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ProCat>) {
          report = validate_procat(v);
        } else if constexpr (std::is_same_v<T, CtsFunctor>) {
          report.merge(validate_procat(*v.base), "procat");
          if (report.ok()) report.merge(check_functor(v), "functor");
        } else if constexpr (std::is_same_v<T, NatTrans>) {
          report.merge(validate_procat(*v.source().base), "procat");
          if (report.ok()) report.merge(check_functor(v.source()), "source");
          if (report.ok()) report.merge(check_functor(v.target()), "target");
          if (report.ok()) report.merge(check_nat_trans(v), "transformation");
        } else if constexpr (std::is_same_v<T, StrataSpec>) {
          report.merge(validate_procat(build_strata(v)), "strata");
        } else {
          report.merge(validate_presentation(v.presentation), "presentation");
        }
      },
      doc.value);
  if (format == "json") {
    Json issues = Json::array();
    for (const auto& i : report.issues) issues.push_back(Json{{"code", i.code}, {"message", i.message}, {"witness", i.witness}});
    std::cout << pretty(Json{{"kind", doc.kind}, {"valid", report.ok()}, {"checked", report.checked}, {"issues", issues}})
              << '\n';
  } else if (report.ok()) {
    std::cout << "valid " << doc.kind << " (" << report.checked << " checks)\n";
  } else {
    std::cout << "invalid " << doc.kind << '\n' << report.to_string();
  }
  return report.ok() ? Exit::ok : Exit::semantic;
}

// --------------------------------------------------------------- fundamental

void print_level(std::ostream& out, const ProCat& p, std::size_t k) {
  const auto& c = p.level(k);
  const auto n = c.object_count();
  std::size_t width = 4;
  for (std::size_t x = 0; x < n; ++x) width = std::max(width, name_of(p.objects, x).size() + 2);
  out << "level " << k << "\n  hom sizes (row = source, column = target)\n  " << std::setw(static_cast<int>(width)) << "";
  for (std::size_t y = 0; y < n; ++y) out << std::setw(static_cast<int>(width)) << name_of(p.objects, y);
  out << '\n';
  for (std::size_t x = 0; x < n; ++x) {
    out << "  " << std::setw(static_cast<int>(width)) << name_of(p.objects, x);
    for (std::size_t y = 0; y < n; ++y) out << std::setw(static_cast<int>(width)) << c.hom_size(x, y);
    out << '\n';
  }
  out << "  identities " << join(c.identities) << '\n';
  out << "  composition g.f (one row per g)\n";
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z) {
        const auto fs = c.hom_size(x, y), gs = c.hom_size(y, z);
        if (fs == 0 || gs == 0) continue;
        out << "    " << name_of(p.objects, x) << " -> " << name_of(p.objects, y) << " -> " << name_of(p.objects, z)
            << ":";
        const auto& t = c.composition[c.triple_index(x, y, z)];
        for (std::size_t g = 0; g < gs; ++g) {
          out << (g ? " |" : "");
          for (std::size_t f = 0; f < fs; ++f) out << ' ' << t[g * fs + f];
        }
        out << '\n';
      }
  if (k > 0) {
    out << "  transition to level " << k - 1 << '\n';
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (c.hom_size(x, y) > 0) {
          out << "    " << name_of(p.objects, x) << " -> " << name_of(p.objects, y) << ": "
              << join(p.transitions[k - 1][x * n + y].table()) << '\n';
        }
  }
}

int cmd_fundamental(const std::string& path, const std::vector<std::size_t>& points, const std::string& format,
                    std::optional<std::size_t> bound) {
  auto src = load_presentation(path, points, bound);
  const auto& g = src.presentation;
  FundamentalCategory pi1;
  std::string status = "ok";
  try {
    pi1 = fundamental_category(g);
  } catch (const StageError& e) {
    std::cout << "cross-validation: FAIL\n" << e.what() << '\n';
    return Exit::semantic;
  }
  const auto& p = *pi1.category;
  if (format == "json") {
    Json levels = Json::array();
    for (std::size_t k = 0; k < p.depth(); ++k) {
      Json homs = Json::array();
      for (std::size_t x = 0; x < p.object_count(); ++x) {
        Json row = Json::array();
        for (std::size_t y = 0; y < p.object_count(); ++y) row.push_back(p.level(k).hom_size(x, y));
        homs.push_back(row);
      }
      levels.push_back(Json{{"level", k}, {"hom_sizes", homs}});
    }
    Json out{{"fibre_points", g.fibre_points},
             {"hom_sizes", levels},
             {"cross_validation", Json{{"status", status},
                                       {"checks", pi1.cross_validation.checked},
                                       {"family_sizes", pi1.family_sizes},
                                       {"skipped_pairs", pi1.skipped_pairs}}},
             {"category", to_json(make_document(p))}};
    std::cout << pretty(out) << '\n';
    return Exit::ok;
  }
  std::cout << "fundamental category on fibre points";
  for (auto x : g.fibre_points) std::cout << ' ' << name_of(g.base->objects, x);
  std::cout << "\nlevels " << p.depth() << '\n';
  for (std::size_t k = 0; k < p.depth(); ++k) print_level(std::cout, p, k);
  std::cout << "cross-validation: " << status << " (" << pi1.cross_validation.checked << " checks, family sizes "
            << join(pi1.family_sizes) << ", pairs over budget " << join(pi1.skipped_pairs) << ")\n";
  return Exit::ok;
}

// ------------------------------------------------------------------- realize

int cmd_realize(const std::string& presentation_path, const std::string& functor_path, const std::string& format,
                std::optional<std::size_t> bound) {
  auto src = load_presentation(presentation_path, {}, bound);
  auto doc = read_document(functor_path);
  auto* f = std::get_if<CtsFunctor>(&doc.value);
  if (!f) throw UsageError(functor_path + ": expected a functor document, found " + doc.kind);
  auto ctx = make_context(src.presentation);
  if (!(*f->base == *ctx.pi1.category)) {
    std::cout << "stage input: FAIL\nthe functor is not defined on the fundamental category of this presentation\n";
    return Exit::semantic;
  }
  // Rebind onto the context's category so identity checks by pointer agree.
  auto input = *f;
  input.base = ctx.pi1.category;
  RealizationTrace t;
  try {
    t = realize(ctx, input);
  } catch (const StageError& e) {
    std::cout << "stage " << e.stage() << ": FAIL\n" << e.what() << '\n';
    return Exit::semantic;
  }
  std::vector<std::size_t> quotient_values, input_values;
  for (const auto& v : t.quotient.values) quotient_values.push_back(v.size);
  for (const auto& v : input.values) input_values.push_back(v.size);
  const auto kernel_ambient = t.kernel.ambient.total_size();
  if (format == "json") {
    Json summands = Json::array();
    for (const auto& [i, e] : t.cover.summands) summands.push_back(Json::array({i, e}));
    Json out{{"input_values", input_values},
             {"cover", Json{{"level", t.cover.level}, {"size", t.cover.object.total_size()}, {"summands", summands}}},
             {"kernel_pair", Json{{"size", t.kernel.size()}, {"ambient", kernel_ambient}}},
             {"kernel_subobject", Json{{"size", t.kernel_subobject.size()}}},
             {"equivalence", "ok"},
             {"quotient", Json{{"values", quotient_values}, {"size", t.quotient.total_size()}}},
             {"iso_witness", t.iso_witness},
             {"realized", to_json(make_document(t.quotient))}};
    std::cout << pretty(out) << '\n';
    return Exit::ok;
  }
  std::cout << "input: values " << join(input_values) << " at level " << input.level << '\n';
  std::cout << "stage cover: level " << t.cover.level << ", " << t.cover.summands.size()
            << " corepresentable summands, |A| = " << t.cover.object.total_size() << ", covering map surjective\n";
  std::cout << "stage kernel-pair: " << t.kernel.size() << " of " << kernel_ambient << " pairs in ev(A) x ev(A)\n";
  std::cout << "stage realization: subobject of A x A with " << t.kernel_subobject.size() << " elements\n";
  std::cout << "stage equivalence: reflexive, symmetric, transitive at every object\n";
  std::cout << "stage quotient: values " << join(quotient_values) << ", |A/B| = " << t.quotient.total_size() << '\n';
  for (std::size_t i = 0; i < t.iso_witness.size(); ++i) {
    std::cout << "stage iso: fibre point " << name_of(src.presentation.base->objects, src.presentation.fibre_points[i])
              << " class -> element " << join(t.iso_witness[i]) << '\n';
  }
  return Exit::ok;
}

// --------------------------------------------------------------------- check

int cmd_check(const std::string& path, const std::string& suite, std::uint64_t seed, const std::string& format,
              const std::vector<std::size_t>& points, std::optional<std::size_t> window,
              std::optional<std::size_t> bound) {
  auto src = load_presentation(path, points, bound);
  std::vector<SuiteReport> reports;
  if (window) {
    auto want = [&](const char* name) { return suite == "all" || suite == name; };
    if (want("pretopos")) reports.push_back(pretopos_suite(src.presentation, seed));
    if (want("lemmas")) reports.push_back(lemmas_suite(src.presentation, {*window}));
    if (want("exodromy")) reports.push_back(exodromy_suite(src.presentation, {3, *window}));
    if (want("opcompact")) reports.push_back(opcompact_suite(src.presentation, seed));
  } else {
    reports = run_suites(src.presentation, suite, seed);
  }
  bool all_ok = std::all_of(reports.begin(), reports.end(), [](const SuiteReport& r) { return r.ok(); });
  if (format == "json") {
    Json suites = Json::array();
    for (const auto& r : reports) {
      suites.push_back(Json{{"name", r.name},
                            {"ok", r.ok()},
                            {"instances", r.instances},
                            {"checks", r.checks},
                            {"skipped", r.skipped},
                            {"failures", r.failure_count},
                            {"first_failures", r.failures}});
    }
    std::cout << pretty(Json{{"seed", seed}, {"ok", all_ok}, {"suites", suites}}) << '\n';
  } else {
    std::cout << "seed " << seed << '\n' << render_text(reports);
  }
  return all_ok ? Exit::ok : Exit::semantic;
}

// ------------------------------------------------------------------- example

int cmd_example(const std::string& name) {
  auto ex = canned_example(name);
  if (!ex) {
    std::string known;
    for (const auto& e : canned_examples()) known += " " + e.name;
    throw UsageError("unknown example \"" + name + "\"; known:" + known);
  }
  std::cout << serialize(make_document(io::PresentationSource{ex->spec, ex->presentation}));
  return Exit::ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galois categories and exodromy on finite presentations"};
  app.require_subcommand(1);

  std::string format = "text";
  std::uint64_t seed = 0;
  std::vector<std::size_t> points;
  std::optional<std::size_t> window, bound;
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));
  };
  auto add_bound = [&](CLI::App* sub) {
    sub->add_option("--generator-bound", bound, "largest test object (total elements) in generated families");
  };

  std::string path, functor_path, suite = "all", example_name;

  auto* validate = app.add_subcommand("validate", "check a document against the laws of its kind");
  validate->add_option("path", path, "document")->required();
  add_format(validate);

  auto* fundamental = app.add_subcommand("fundamental", "compute and print the fundamental category");
  fundamental->add_option("path", path, "presentation, procat or strata document")->required();
  fundamental->add_option("--points", points, "fibre points (object indices)")->delimiter(',');
  add_format(fundamental);
  add_bound(fundamental);

  auto* realize_cmd = app.add_subcommand("realize", "realize a functor on the fundamental category as an object");
  realize_cmd->add_option("presentation", path, "presentation document")->required();
  realize_cmd->add_option("functor", functor_path, "functor document over the fundamental category")->required();
  add_format(realize_cmd);
  add_bound(realize_cmd);

  auto* check = app.add_subcommand("check", "run property suites on a presentation");
  check->add_option("path", path, "presentation, procat or strata document")->required();
  check->add_option("--suite", suite, "suite to run")
      ->check(CLI::IsMember({"pretopos", "lemmas", "exodromy", "opcompact", "all"}));
  check->add_option("--seed", seed, "seed for the random suites");
  check->add_option("--points", points, "fibre points (object indices)")->delimiter(',');
  check->add_option("--window", window, "size window for family members in the lemma and exodromy suites");
  add_format(check);
  add_bound(check);

  auto* example = app.add_subcommand("example", "print a canned presentation document");
  example->add_option("name", example_name, "example name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version come through here with exit code 0.
    auto code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*validate) return cmd_validate(path, format);
    if (*fundamental) return cmd_fundamental(path, points, format, bound);
    if (*realize_cmd) return cmd_realize(path, functor_path, format, bound);
    if (*check) return cmd_check(path, suite, seed, format, points, window, bound);
    if (*example) return cmd_example(example_name);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const ValidationError& e) {
    std::cout << "validation failure (" << e.law() << "): " << e.what() << '\n';
    return Exit::semantic;
  } catch (const StageError& e) {
    std::cout << "stage " << e.stage() << ": FAIL\n" << e.what() << '\n';
    return Exit::semantic;
  } catch (const ShapeError& e) {
    std::cout << "shape error: " << e.what() << '\n';
    return Exit::semantic;
  }
  return Exit::usage;
}
