/*
 * Copyright (C) 2026 The glyphembed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "glyphembed/iface/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "glyphembed/eval/embedding_table.hpp"
#include "glyphembed/eval/probe.hpp"
#include "glyphembed/eval/retrieval.hpp"
#include "glyphembed/glyphset/dataset.hpp"
#include "glyphembed/iface/http_server.hpp"
#include "glyphembed/iface/service.hpp"
#include "glyphembed/index/font_index.hpp"
#include "glyphembed/nn/checkpoint.hpp"
#include "glyphembed/train/trainer.hpp"

namespace glyphembed::iface {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSplit:
    case ErrorCode::InvalidCharset:
    case ErrorCode::ConfigInvalid:
    case ErrorCode::SameCharacter:
    case ErrorCode::CharsetTooSmall:
    case ErrorCode::EmptyCharset:
    case ErrorCode::OverlappingCharsets:
    case ErrorCode::MissingAttributes:
    case ErrorCode::IncomparableReports:
    case ErrorCode::UnknownFont:
    case ErrorCode::UnknownCharacter:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DatasetTooSmall:
    case ErrorCode::EmptyDataset:
      return true;
    default:
      return false;
  }
}

namespace {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out || !(out << text)) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
}

std::string default_data_root() {
  const char* env = std::getenv("GLYPHEMBED_DATA");
  return env ? env : "";
}

fs::path require_data(const std::string& data) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "--data is required (or set GLYPHEMBED_DATA)");
  return data;
}

// Dataset plus the optional held-out split selected by --val-fonts.
struct DataSelection {
  std::string data;
  std::string charset = "A-Z";
  std::size_t val_fonts = 0;
  std::uint64_t split_seed = 0;

  void add_flags(CLI::App* app, bool with_split) {
    app->add_option("--data", data, "Font directory or rendered dataset (default: $GLYPHEMBED_DATA)");
    app->add_option("--charset", charset, "Character set, e.g. A-Z, a-z, 0-9, A-M")->capture_default_str();
    if (with_split) {
      app->add_option("--val-fonts", val_fonts, "Hold out this many fonts for validation")->capture_default_str();
      app->add_option("--split-seed", split_seed, "Seed of the font split")->capture_default_str();
    }
  }

  glyphset::GlyphDataset load(int size, std::ostream& err, const std::optional<glyphset::CharSet>& cs = {}) const {
    auto ds = glyphset::load_dataset(require_data(data), cs ? *cs : glyphset::CharSet::named(charset), size);
    for (const auto& x : ds.exclusions()) {
      err << "excluded " << x.font_id;
      if (x.codepoint) err << " (" << glyphset::codepoint_label(x.codepoint) << ")";
      err << ": " << x.reason << '\n';
    }
    return ds;
  }

  // Fonts evaluated by eval/index: the validation split when requested.
  glyphset::GlyphDataset evaluation_set(int size, std::ostream& err,
                                        const std::optional<glyphset::CharSet>& cs = {}) const {
    auto ds = load(size, err, cs);
    if (val_fonts == 0) return ds;
    return glyphset::split_fonts(ds, {split_seed, val_fonts}).second;
  }
};

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  DataSelection sel;
  std::string out;
  int size = 64;
};

int run_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  const auto ds = a.sel.load(a.size, err);
  glyphset::write_rendered(ds, a.out);
  out << "rendered " << ds.num_fonts() << " fonts x " << ds.charset().size() << " characters to " << a.out << '\n';
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  DataSelection sel;
  std::string out, config, log, resume, best;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> objective;
  std::optional<double> lr;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  train::TrainConfig cfg;
  if (!a.config.empty()) cfg = train::TrainConfig::from_json(read_json_file(a.config));
  if (a.objective) cfg.objective = train::objective_from_string(*a.objective);
  if (a.seed) cfg.seed = *a.seed;
  if (a.lr) cfg.learning_rate = *a.lr;
  if (a.steps) cfg.steps = *a.steps;
  cfg.validate();

  const auto ds = a.sel.load(cfg.encoder.input_size, err);
  std::optional<glyphset::GlyphDataset> train_set, val_set;
  if (a.sel.val_fonts > 0) {
    auto [tr, va] = glyphset::split_fonts(ds, {a.sel.split_seed, a.sel.val_fonts});
    train_set.emplace(std::move(tr));
    val_set.emplace(std::move(va));
  } else {
    train_set.emplace(ds);
  }
  if (!a.best.empty() && !val_set) throw Error(ErrorCode::InvalidArgument, "--best needs --val-fonts");

  std::ofstream log_file;
  train::TrainOptions options;
  options.log = &err;
  if (!a.log.empty()) {
    log_file.open(a.log);
    if (!log_file) throw Error(ErrorCode::InvalidArgument, "cannot write " + a.log);
    options.log = &log_file;
  }

  const auto* val = val_set ? &*val_set : nullptr;
  train::TrainResult result;
  if (!a.resume.empty()) {
    result = train::resume(nn::load_checkpoint(a.resume), *train_set, val, cfg, cfg.steps, options);
  } else {
    result = train::train(*train_set, val, cfg, options);
  }
  auto tag_split = [&](nn::Checkpoint& c) {
    c.metadata["split"] = {{"seed", a.sel.split_seed}, {"n_val_fonts", a.sel.val_fonts}};
  };
  tag_split(result.checkpoint);
  nn::save_checkpoint(result.checkpoint, a.out);
  out << "wrote " << a.out << " (" << train::checkpoint_id(result.checkpoint) << ", "
      << result.report.seconds << " s)\n";
  if (result.best) {
    out << "best validation MACC: " << percent(result.report.best_macc) << " at step " << *result.report.best_step
        << '\n';
    if (!a.best.empty()) {
      tag_split(*result.best);
      nn::save_checkpoint(*result.best, a.best);
      out << "wrote " << a.best << '\n';
    }
  }
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  DataSelection sel;
  std::vector<std::string> checkpoints, tables;
  std::string gallery, json_out;
  bool allow_overlap = false;
  bool pairs = false;
  bool charset_given = false;
  std::size_t k = 1;
};

eval::EmbeddingTable checkpoint_table(const std::string& path, const DataSelection& sel, std::ostream& err,
                                      const std::optional<glyphset::CharSet>& cs = {}) {
  const auto ckpt = nn::load_checkpoint(path);
  const auto enc = train::encoder_from_checkpoint(ckpt);
  const auto ds = sel.evaluation_set(enc.config().input_size, err, cs);
  return eval::embed_all(enc, ds, 64, train::checkpoint_id(ckpt));
}

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.checkpoints.empty() && a.tables.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give --checkpoint or --table");
  }
  std::vector<std::pair<std::string, eval::EmbeddingTable>> tables;
  for (const auto& path : a.tables) {
    tables.emplace_back(fs::path(path).stem().string(), eval::EmbeddingTable::from_json(read_json_file(path)));
  }
  // Checkpoints are embedded over the query and gallery characters together.
  std::optional<glyphset::CharSet> render_set;
  if (!a.gallery.empty()) {
    const auto q = glyphset::CharSet::named(a.sel.charset), g = glyphset::CharSet::named(a.gallery);
    std::vector<char32_t> cps = q.codepoints();
    for (const char32_t cp : g.codepoints()) {
      if (!q.contains(cp)) cps.push_back(cp);
    }
    render_set.emplace(q.id() + "+" + g.id(), std::move(cps));
  }
  for (const auto& path : a.checkpoints) {
    tables.emplace_back(fs::path(path).stem().string(), checkpoint_table(path, a.sel, err, render_set));
  }

  std::vector<std::pair<std::string, eval::RetrievalReport>> reports;
  for (const auto& [name, table] : tables) {
    // A table carries its own charset; an explicit --charset narrows it.
    const auto query = a.charset_given ? glyphset::CharSet::named(a.sel.charset) : table.charset;
    auto report = a.gallery.empty()
                      ? eval::retrieval_macc(table, query, a.k)
                      : eval::cross_macc(table, query, glyphset::CharSet::named(a.gallery), a.allow_overlap, a.k);
    if (tables.size() > 1) out << name << ' ';
    out << "MACC: " << percent(report.macc) << '\n';
    if (a.pairs) {
      for (const auto& p : report.pairs) {
        out << "  " << glyphset::codepoint_label(p.query) << "->" << glyphset::codepoint_label(p.gallery) << ": "
            << percent(p.acc) << '\n';
      }
    }
    reports.emplace_back(name, std::move(report));
  }

  json doc;
  if (reports.size() == 1) {
    doc = reports[0].second.to_json();
  } else {
    const auto cmp = eval::compare_methods(reports);
    for (const auto& row : cmp.rows) {
      out << row.name << ": " << percent(row.macc) << " (-" << percent(row.delta_to_best) << " to best)\n";
    }
    doc = cmp.to_json();
    for (const auto& [name, r] : reports) doc["reports"][name] = r.to_json();
  }
  if (!a.json_out.empty()) write_text(a.json_out, doc.dump(2) + "\n");
  return kExitOk;
}

// ---- probe -----------------------------------------------------------------

struct ProbeArgs {
  DataSelection sel;
  std::string checkpoint, table, attributes;
  std::size_t steps = 2000;
  std::vector<double> lrs;
};

int run_probe(const ProbeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.checkpoint.empty() == a.table.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --checkpoint or --table");
  }
  if (a.sel.val_fonts == 0) throw Error(ErrorCode::InvalidArgument, "--val-fonts must be positive");
  const auto attrs = eval::AttributeTable::read_csv(a.attributes);
  eval::EmbeddingTable table;
  if (!a.table.empty()) {
    table = eval::EmbeddingTable::from_json(read_json_file(a.table));
  } else {
    DataSelection all = a.sel;
    all.val_fonts = 0;
    table = checkpoint_table(a.checkpoint, all, err);
  }
  std::vector<std::string> ids;
  for (const auto& id : table.font_ids) {
    if (std::find(attrs.font_ids.begin(), attrs.font_ids.end(), id) != attrs.font_ids.end()) ids.push_back(id);
  }
  const auto part = glyphset::partition_fonts(ids, {a.sel.split_seed, a.sel.val_fonts});
  std::vector<std::string> train_fonts, val_fonts;
  for (const auto i : part.train) train_fonts.push_back(ids[i]);
  for (const auto i : part.val) val_fonts.push_back(ids[i]);

  eval::ProbeOptions options;
  options.steps = a.steps;
  if (!a.lrs.empty()) options.lr_grid = a.lrs;
  const auto r = eval::linear_probe(table, attrs, train_fonts, val_fonts, options);
  char buf[160];
  std::snprintf(buf, sizeof buf, "L1: %.4f (mean baseline %.4f; lr %g, step %zu)\n", r.best_l1, r.mean_baseline_l1,
                r.best_lr, r.best_step);
  out << buf;
  return kExitOk;
}

// ---- index -----------------------------------------------------------------

struct IndexArgs {
  DataSelection sel;
  std::string checkpoint, out;
  std::string aggregation = "mean";
  bool no_previews = false;
};

int run_index(const IndexArgs& a, std::ostream& out, std::ostream& err) {
  const auto ckpt = nn::load_checkpoint(a.checkpoint);
  const auto enc = train::encoder_from_checkpoint(ckpt);
  const auto ds = a.sel.load(enc.config().input_size, err);
  auto idx = index::build_index(enc, ds, eval::aggregation_from_string(a.aggregation), train::checkpoint_id(ckpt));
  if (!a.no_previews) index::write_previews(idx, ds, index::preview_dir(a.out));
  index::save_index(idx, a.out);
  out << "indexed " << idx.num_fonts() << " fonts x " << idx.glyphs.charset.size() << " characters to " << a.out
      << '\n';
  return kExitOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string index_path, checkpoint, host = "127.0.0.1", static_dir;
  int port = 8080;
  std::size_t k = 10;
};

std::atomic<HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int run_serve(const ServeArgs& a, std::ostream& out, std::ostream&) {
  auto idx = index::load_index(a.index_path);
  std::optional<nn::Encoder<float>> model;
  if (!a.checkpoint.empty()) {
    const auto ckpt = nn::load_checkpoint(a.checkpoint);
    if (train::checkpoint_id(ckpt) != idx.checkpoint_id) {
      throw Error(ErrorCode::InvalidArgument, "checkpoint " + train::checkpoint_id(ckpt) +
                                                  " did not build this index (" + idx.checkpoint_id + ")");
    }
    model.emplace(train::encoder_from_checkpoint(ckpt));
  }
  ServiceOptions so;
  so.default_k = a.k;
  const Service service(std::move(idx), std::move(model), fs::absolute(a.index_path).parent_path(), so);
  HttpServer server(service, {a.host, a.port, a.static_dir});
  const int port = server.bind();
  out << "serving " << service.index().num_fonts() << " fonts on http://" << a.host << ':' << port
      << (service.has_model() ? "" : " (no model: image queries disabled)") << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Font embedding toolkit: render glyphs, train, evaluate, index and serve", "glyphembed"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Rasterize a font directory into a PNG dataset");
  render.sel.data = default_data_root();
  render.sel.add_flags(render_cmd, false);
  render_cmd->add_option("--out", render.out, "Output directory")->required();
  render_cmd->add_option("--size", render.size, "Glyph size in pixels")->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an encoder");
  tr.sel.data = default_data_root();
  tr.sel.add_flags(train_cmd, true);
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_option("--config", tr.config, "JSON training config");
  train_cmd->add_option("--objective", tr.objective,
                        "paired_glyph | classification | autoencoder | style_transfer | triplet");
  train_cmd->add_option("--steps", tr.steps, "Number of steps (overrides the config)");
  train_cmd->add_option("--seed", tr.seed, "Seed (overrides the config)");
  train_cmd->add_option("--lr", tr.lr, "Learning rate (overrides the config)");
  train_cmd->add_option("--log", tr.log, "JSON-lines log file (default: stderr)");
  train_cmd->add_option("--resume", tr.resume, "Continue from a checkpoint for --steps more steps");
  train_cmd->add_option("--best", tr.best, "Also write the best-validation checkpoint here");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Font retrieval MACC of checkpoints or embedding tables");
  ev.sel.data = default_data_root();
  ev.sel.add_flags(eval_cmd, true);
  eval_cmd->add_option("--checkpoint", ev.checkpoints, "Checkpoint(s) to evaluate on --data");
  eval_cmd->add_option("--table", ev.tables, "Precomputed embedding table(s) (JSON)");
  eval_cmd->add_option("--gallery", ev.gallery, "Gallery charset for cross-charset MACC (query: --charset)");
  eval_cmd->add_flag("--allow-overlap", ev.allow_overlap, "Permit overlapping query and gallery charsets");
  eval_cmd->add_option("--k", ev.k, "Top-k match criterion")->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--pairs", ev.pairs, "Print ACC for every character pair");
  eval_cmd->add_option("--json", ev.json_out, "Write the report as JSON");

  ProbeArgs pr;
  auto* probe_cmd = app.add_subcommand("probe", "Linear probe from embeddings to font attributes");
  pr.sel.data = default_data_root();
  pr.sel.add_flags(probe_cmd, true);
  probe_cmd->add_option("--checkpoint", pr.checkpoint, "Checkpoint to embed --data with");
  probe_cmd->add_option("--table", pr.table, "Precomputed embedding table (JSON)");
  probe_cmd->add_option("--attributes", pr.attributes, "Attribute CSV (font_id,attr_1,...)")->required();
  probe_cmd->add_option("--steps", pr.steps, "Adam steps per learning rate")->capture_default_str();
  probe_cmd->add_option("--lr", pr.lrs, "Learning-rate grid (default 1e-6 ... 1e-2)");

  IndexArgs ix;
  auto* index_cmd = app.add_subcommand("index", "Build a retrieval index with previews");
  ix.sel.data = default_data_root();
  ix.sel.add_flags(index_cmd, false);
  index_cmd->add_option("--checkpoint", ix.checkpoint, "Trained checkpoint")->required();
  index_cmd->add_option("--out", ix.out, "Index file (previews go to <stem>_previews/)")->required();
  index_cmd->add_option("--aggregation", ix.aggregation, "mean | maxpool")->capture_default_str();
  index_cmd->add_flag("--no-previews", ix.no_previews, "Skip preview rendering");

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP retrieval service");
  serve_cmd->add_option("--index", sv.index_path, "Index file")->required();
  serve_cmd->add_option("--checkpoint", sv.checkpoint, "Checkpoint that built the index (enables image queries)");
  serve_cmd->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", sv.port, "Port")->capture_default_str();
  serve_cmd->add_option("--k", sv.k, "Default result count")->capture_default_str()->check(CLI::PositiveNumber);
  serve_cmd->add_option("--static", sv.static_dir, "Directory served under /");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    if (app.get_subcommands().empty()) err << '\n' << app.help();
    return kExitValidation;
  }

  try {
    if (render_cmd->parsed()) return run_render(render, out, err);
    if (train_cmd->parsed()) return run_train(tr, out, err);
    if (eval_cmd->parsed()) {
      ev.charset_given = eval_cmd->count("--charset") > 0;
      return run_eval(ev, out, err);
    }
    if (probe_cmd->parsed()) return run_probe(pr, out, err);
    if (index_cmd->parsed()) return run_index(ix, out, err);
    if (serve_cmd->parsed()) return run_serve(sv, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace glyphembed::iface
