// lalec: compile, validate, grammar, search and render from the command line.

#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lalec/dsl.hpp"
#include "lalec/error.hpp"
#include "lalec/grammar.hpp"
#include "lalec/optimizer.hpp"
#include "lalec/pcs.hpp"
#include "lalec/render.hpp"
#include "lalec/toyml/datasets.hpp"
#include "lalec/toyml/registry.hpp"

namespace {

using namespace lalec;

// Exit codes shared across commands.
constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;
constexpr int kParseError = 3;
constexpr int kNoValidTrial = 4;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Writes through a temporary sibling so readers never see partial output.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  // Devices and pipes (/dev/stdout, fifos) are written in place; renaming
  // over them would replace the node itself.
  std::error_code st_ec;
  auto st = std::filesystem::status(path, st_ec);
  if (std::filesystem::exists(st) && !std::filesystem::is_regular_file(st)) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) throw Error(ErrorCode::Io, "cannot write " + path);
    return;
  }
  // Renaming over a symlink would replace the link, so target what it names.
  std::string target = path;
  if (std::filesystem::is_symlink(std::filesystem::symlink_status(path, st_ec))) {
    target = std::filesystem::canonical(path, st_ec).string();
    if (st_ec) target = path;
  }
  std::string tmp = target + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
    f << text;
    if (!f.flush()) throw Error(ErrorCode::Io, "cannot write " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot write " + path);
  }
}

int report(const Error& e, int code) {
  std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
  return code;
}

bool looks_like_json(const std::string& text) {
  auto i = text.find_first_not_of(" \t\r\n");
  return i != std::string::npos && text[i] == '{';
}

struct Source {
  std::string pipeline_file;
  std::string expr;
  std::string schemas;

  void add_to(CLI::App* app) {
    auto* p = app->add_option("--pipeline", pipeline_file,
                              "pipeline file: DSL text or {\"steps\": ...} JSON");
    auto* e = app->add_option("--expr", expr, "pipeline expression");
    p->excludes(e);
    app->add_option("--schemas", schemas, "schema directory (default $LALEC_SCHEMA_PATH or schemas)");
  }

  Registry registry() const { return toyml::load_registry(toyml::schema_dir(schemas)); }

  Operator load(const Registry& reg) const {
    if (pipeline_file.empty() && expr.empty()) {
      throw Error(ErrorCode::InvalidArgument, "one of --pipeline or --expr is required");
    }
    std::string text = expr.empty() ? read_file(pipeline_file) : expr;
    if (looks_like_json(text)) {
      Json j;
      try {
        j = Json::parse(text);
      } catch (const Json::parse_error& ex) {
        throw SyntaxError(1, 1, std::string("malformed JSON: ") + ex.what());
      }
      return operator_from_json(j, reg);
    }
    return parse_expr(text, reg);
  }
};

// compile ---------------------------------------------------------------------

struct CompileArgs {
  Source src;
  std::string backend = "hier";
  bool no_constraints = false;
  std::size_t cont_samples = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_compile(const CompileArgs& a) {
  try {
    auto reg = a.src.registry();
    Operator op = a.src.load(reg);
    CompileOptions opts;
    opts.keep_constraints = !a.no_constraints;
    auto ir = combine(op, opts);
    std::string text;
    if (a.backend == "hier") {
      text = emit_hierarchical(*ir).dump(2) + "\n";
    } else if (a.backend == "flat") {
      text = flat_to_json(emit_flat(*ir)).dump(2) + "\n";
    } else if (a.backend == "pcs") {
      text = emit_pcs(*ir);
    } else {
      text = grid_to_json(emit_grid(*ir, a.cont_samples, a.seed)).dump(2) + "\n";
    }
    write_output(a.out, text);
    return kOk;
  } catch (const SyntaxError& e) {
    return report(e, kParseError);
  } catch (const Error& e) {
    return report(e, kFailed);
  }
}

// validate --------------------------------------------------------------------

struct ValidateArgs {
  std::string op;
  std::string config;
  std::string schemas;
};

// Keys that are not declared but equal a property's description (ignoring
// case) address that property, so {"solver": ...} reaches S "Solver".
Config resolve_aliases(const Config& c, const SchemaNode& schema) {
  auto declared = declared_domains(schema);
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
  };
  Config out;
  for (const auto& [k, v] : c) {
    std::string key = k;
    bool known = std::any_of(declared.begin(), declared.end(),
                             [&](const auto& p) { return p.first == k; });
    if (!known) {
      for (const auto& [name, prop] : declared) {
        if (!prop->description().empty() && lower(prop->description()) == lower(k)) key = name;
      }
    }
    out.insert_or_assign(key, v);
  }
  return out;
}

int run_validate(const ValidateArgs& a) {
  Registry reg;
  try {
    reg = toyml::load_registry(toyml::schema_dir(a.schemas));
  } catch (const Error& e) {
    return report(e, kFailed);
  }
  const Operator* op = reg.find(a.op);
  if (!op) {
    std::cerr << "error: UnknownOperator: no schema for '" << a.op << "'\n";
    return kFailed;
  }
  Config cfg;
  try {
    std::string text = looks_like_json(a.config) ? a.config : read_file(a.config);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& ex) {
      throw Error(ErrorCode::MalformedJson, ex.what());
    }
    cfg = config_from_json(j, reg);
  } catch (const Error& e) {
    return report(e, kFailed);
  }
  const auto& schema = *op->as_individual().schema;
  auto rep = validate(resolve_aliases(cfg, schema), schema);
  std::cout << rep.to_string() << "\n";
  return rep.ok ? kOk : kInvalid;
}

// grammar ---------------------------------------------------------------------

struct GrammarArgs {
  std::string grammar;
  std::string schemas;
  int depth = 3;
  std::uint64_t seed = 0;
  int max_depth = 5;
  std::string out;
};

std::string planned_text(const Operator& op) {
  try {
    return pretty_print(op) + "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotExpressible) throw;
    return operator_to_json(op).dump(2) + "\n";
  }
}

int run_grammar(const GrammarArgs& a, bool unfold_mode) {
  try {
    auto reg = toyml::load_registry(toyml::schema_dir(a.schemas));
    auto g = parse_grammar(read_file(a.grammar), reg);
    Operator op = unfold_mode ? unfold(g, reg, a.depth) : sample(g, reg, a.seed, a.max_depth);
    write_output(a.out, planned_text(op));
    return kOk;
  } catch (const SyntaxError& e) {
    return report(e, kParseError);
  } catch (const Error& e) {
    return report(e, kFailed);
  }
}

// search ----------------------------------------------------------------------

struct SearchArgs {
  Source src;
  std::string data;
  std::string synth;
  std::string label = "label";
  std::string optimizer = "random";
  std::size_t max_trials = 100;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool no_constraints = false;
  std::size_t cont_samples = 1;
  double epsilon = 0.1;
  std::size_t jobs = 1;
  std::string out;
  std::string best_out;
  std::string curve;
  bool timing = false;
};

LabeledDataset load_data(const SearchArgs& a) {
  if (!a.data.empty()) return toyml::load_csv(a.data, a.label);
  if (a.synth.empty()) throw Error(ErrorCode::InvalidArgument, "one of --data or --synth is required");
  // kind,n,seed
  std::vector<std::string> parts;
  std::stringstream ss(a.synth);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "--synth expects kind,n,seed");
  try {
    return toyml::synth_dataset(parts[0], std::stoul(parts[1]), std::stoull(parts[2]));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "--synth expects kind,n,seed");
  }
}

int run_search(const SearchArgs& a) {
  try {
    auto reg = a.src.registry();
    Operator op = a.src.load(reg);
    auto data = load_data(a);
    CompileOptions copts;
    copts.keep_constraints = !a.no_constraints;
    auto ir = combine(op, copts);
    OptimizerSpec spec;
    spec.strategy = parse_strategy(a.optimizer);
    spec.max_trials = a.max_trials;
    spec.seed = a.seed;
    spec.bandit_epsilon = a.epsilon;
    spec.jobs = a.jobs;
    auto objective = make_cv_objective(ir, data, a.folds, a.seed);
    History h = lalec::run_search(*ir, objective, spec, a.cont_samples);

    if (!a.out.empty()) write_output(a.out, history_to_json(h, a.timing).dump(2) + "\n");
    if (!a.curve.empty()) write_output(a.curve, curve_csv(h));
    std::cout << "trials: " << h.trials.size() << "\n";
    std::cout << "invalid trials: " << h.failed_count() << "\n";
    if (!h.best) {
      std::cout << "best loss: none\n";
      std::cerr << "error: NoValidTrial: none of the trials succeeded\n";
      return kNoValidTrial;
    }
    const Trial& best = h.trials[*h.best];
    std::cout << "best loss: " << format_number(best.loss) << " (trial " << best.index << ")\n";
    if (!a.best_out.empty()) {
      write_output(a.best_out, operator_to_json(decode(*ir, best.point)).dump(2) + "\n");
    }
    return kOk;
  } catch (const SyntaxError& e) {
    return report(e, kParseError);
  } catch (const Error& e) {
    return report(e, kFailed);
  }
}

// render ----------------------------------------------------------------------

struct RenderArgs {
  Source src;
  std::string format = "dot";
  std::string out;
};

int run_render(const RenderArgs& a) {
  try {
    auto reg = a.src.registry();
    write_output(a.out, render_dot(a.src.load(reg)));
    return kOk;
  } catch (const SyntaxError& e) {
    return report(e, kParseError);
  } catch (const Error& e) {
    return report(e, kFailed);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lalec: search-space compiler for ML pipelines"};
  app.require_subcommand(1);

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "compile a planned pipeline into a search space");
  ca.src.add_to(compile);
  compile->add_option("--backend", ca.backend, "hier, flat, pcs or grid")
      ->check(CLI::IsMember({"hier", "flat", "pcs", "grid"}));
  compile->add_flag("--no-constraints", ca.no_constraints, "drop side constraints");
  compile->add_option("--cont-samples", ca.cont_samples, "grid: draws per continuous domain");
  compile->add_option("--seed", ca.seed, "grid: seed");
  compile->add_option("--out", ca.out, "output file (default stdout)");

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "check a hyperparameter configuration");
  val->add_option("--op", va.op, "operator name")->required();
  val->add_option("--config", va.config, "JSON file or inline JSON object")->required();
  val->add_option("--schemas", va.schemas, "schema directory");

  GrammarArgs ga;
  auto* gram = app.add_subcommand("grammar", "unfold or sample a pipeline grammar");
  gram->require_subcommand(1);
  auto* unf = gram->add_subcommand("unfold", "bounded unfolding into a planned pipeline");
  auto* smp = gram->add_subcommand("sample", "draw one derivation");
  for (auto* sc : {unf, smp}) {
    sc->add_option("--grammar", ga.grammar, "grammar file")->required();
    sc->add_option("--schemas", ga.schemas, "schema directory");
    sc->add_option("--out", ga.out, "output file (default stdout)");
  }
  unf->add_option("--depth", ga.depth, "expansions per nonterminal and path");
  smp->add_option("--seed", ga.seed, "seed");
  smp->add_option("--max-depth", ga.max_depth, "nesting depth before forcing termination");

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "search a compiled space with cross validation");
  sa.src.add_to(search);
  auto* data = search->add_option("--data", sa.data, "CSV file with a header row");
  search->add_option("--synth", sa.synth, "synthetic data: kind,n,seed")->excludes(data);
  search->add_option("--label", sa.label, "label column of the CSV");
  search->add_option("--optimizer", sa.optimizer, "random, grid or bandit")
      ->check(CLI::IsMember({"random", "grid", "bandit"}));
  search->add_option("--max-trials", sa.max_trials, "trial budget");
  search->add_option("--folds", sa.folds, "cross-validation folds");
  search->add_option("--seed", sa.seed, "seed");
  search->add_flag("--no-constraints", sa.no_constraints, "drop side constraints");
  search->add_option("--cont-samples", sa.cont_samples, "grid: draws per continuous domain");
  search->add_option("--epsilon", sa.epsilon, "bandit exploration probability");
  search->add_option("--jobs", sa.jobs, "concurrent evaluations (not with bandit)");
  search->add_option("--out", sa.out, "history JSON");
  search->add_option("--best-out", sa.best_out, "best decoded pipeline JSON");
  search->add_option("--curve", sa.curve, "best-so-far CSV");
  search->add_flag("--timing", sa.timing, "include elapsed seconds in the history");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "draw a pipeline as a Graphviz digraph");
  ra.src.add_to(render);
  render->add_option("--format", ra.format, "output format")->check(CLI::IsMember({"dot"}));
  render->add_option("--out", ra.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version surface as "errors" with exit code 0.
    return app.exit(e) == 0 ? kOk : kFailed;
  }

  if (compile->parsed()) return run_compile(ca);
  if (val->parsed()) return run_validate(va);
  if (unf->parsed()) return run_grammar(ga, true);
  if (smp->parsed()) return run_grammar(ga, false);
  if (search->parsed()) return run_search(sa);
  if (render->parsed()) return run_render(ra);
  return kFailed;
}
