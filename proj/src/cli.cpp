#include "shapes2toon/cli.hpp"

#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "shapes2toon/augment.hpp"
#include "shapes2toon/fid.hpp"
#include "shapes2toon/fit.hpp"
#include "shapes2toon/plot.hpp"
#include "shapes2toon/service.hpp"
#include "shapes2toon/toon.hpp"
#include "shapes2toon/train.hpp"

namespace s2t::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

service::Service* g_running_service = nullptr;

void handle_signal(int) {
  if (g_running_service) g_running_service->stop();
}

struct SynthArgs {
  int n = 100;
  std::uint64_t seed = 0;
  int size = 256;
  std::string out;
};

struct AugmentArgs {
  std::string in;
  std::string out;
  int per_base = 15;
  std::uint64_t seed = 0;
  double max_rotate = 25.0;
  double min_scale = 0.8;
  double max_scale = 1.2;
  double max_translate = 0.1;
  bool no_flip = false;
};

struct FitArgs {
  std::string image;
  std::string half = "auto";
  std::string out;
  fit::HoughConfig hough;
};

struct TrainArgs {
  std::string corpus;
  std::string out;
  train::TrainConfig cfg;
  int log_every = 50;
};

struct InferArgs {
  std::string ckpt;
  std::string layout;
  std::string image;
  std::string out;
  std::uint64_t seed = 0;
};

struct FidArgs {
  std::string ckpt;
  std::string corpus;
  std::string split;
  std::string out;
  std::uint64_t seed = 0;
  double train_fraction = 0.958;
  bool all = false;
  std::uint64_t extractor_seed = 20240229;
};

struct ServeArgs {
  service::ServiceConfig cfg;
  std::string ckpt;
  std::string collection;
};

struct PlotArgs {
  std::string csv;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  toon::CorpusOptions opts;
  opts.image_size = a.size;
  const auto m = toon::build_corpus(a.n, a.seed, a.out, opts);
  std::cout << "wrote " << m.size() << " pairs to " << a.out << "\n";
  return 0;
}

int cmd_augment(const AugmentArgs& a) {
  augment::AugmentationPlan plan;
  plan.per_base = a.per_base;
  plan.rng_seed = a.seed;
  plan.ranges.max_rotate_deg = a.max_rotate;
  plan.ranges.min_scale = a.min_scale;
  plan.ranges.max_scale = a.max_scale;
  plan.ranges.max_translate = a.max_translate;
  plan.ranges.allow_flip = !a.no_flip;
  const auto base = corpus::CorpusManifest::load(a.in);
  const auto m = augment::expand_corpus(a.in, base, plan, a.out);
  std::cout << "wrote " << m.size() << " pairs to " << a.out << "\n";
  return 0;
}

int cmd_fit(const FitArgs& a) {
  RasterImage img = read_png(a.image);
  const bool joined = img.width() == 2 * img.height();
  if (a.half == "target" || (a.half == "auto" && joined)) {
    img = corpus::PairedSample::from_joined(img).target;
  } else if (a.half == "source") {
    img = corpus::PairedSample::from_joined(img).source;
  } else if (a.half != "whole" && a.half != "auto") {
    throw ValidationError("must be auto, whole, source or target", "--half");
  }
  const auto layout = fit::fit_layout(img, a.hough);
  const std::string doc = shape::serialize_layout(layout) + "\n";
  if (a.out.empty()) {
    std::cout << doc;
  } else {
    write_text(a.out, doc);
  }
  return 0;
}

int cmd_train(const TrainArgs& a) {
  const auto result = train::train_corpus(a.corpus, a.cfg, a.out, [&](const train::LossRecord& r) {
    if (a.log_every > 0 && r.step % a.log_every == 0)
      std::fprintf(stderr, "step %ld  g_adv %.4f  d %.4f  l1 %.4f\n", r.step, r.loss_g_adv, r.loss_d, r.loss_l1);
  });
  std::cout << "trained " << result.log.records.size() << " steps on " << result.split.train.size()
            << " pairs (held out " << result.split.test.size() << "); checkpoint " << result.checkpoint.id << "\n";
  if (!result.split.warning.empty()) std::cerr << "warning: " << result.split.warning << "\n";
  return 0;
}

int cmd_infer(const InferArgs& a) {
  if (a.layout.empty() == a.image.empty()) throw ValidationError("give exactly one of --layout or --image");
  const auto g = nn::load_generator(a.ckpt);
  const int size = g.config().image_size;
  RasterImage source;
  if (!a.layout.empty()) {
    const auto layout = shape::parse_layout(read_text(a.layout));
    layout.validate(true);
    source = shape::rasterize(layout, size, size);
  } else {
    source = read_png(a.image);
    if (source.width() == 2 * source.height()) source = corpus::PairedSample::from_joined(source).source;
  }
  write_png(a.out, train::translate(g, source, a.seed));
  return 0;
}

int cmd_fid(const FidArgs& a) {
  nn::CheckpointInfo info;
  const auto g = nn::load_generator(a.ckpt, &info);
  std::vector<std::string> ids;
  if (!a.split.empty()) {
    const json s = json::parse(read_text(a.split));
    ids = s.at("test").get<std::vector<std::string>>();
  } else {
    const auto m = corpus::CorpusManifest::load(a.corpus);
    if (a.all) {
      for (const auto& e : m.entries) ids.push_back(e.id);
    } else {
      ids = train::split_corpus(m, a.train_fraction, a.seed).test;
    }
  }
  if (ids.size() < 2) throw ValidationError("evaluation needs at least 2 test pairs, found " + std::to_string(ids.size()));
  train::PairSource pairs(a.corpus, ids, g.config().image_size);
  const fid::RandomConvEmbedder extractor(a.extractor_seed);
  const auto report = fid::evaluate_model(g, pairs, extractor, info.id, a.seed);
  const std::string doc = report.to_json().dump(1) + "\n";
  if (!a.out.empty()) write_text(a.out, doc);
  std::cout << doc;
  return 0;
}

int cmd_serve(ServeArgs a) {
  if (!a.ckpt.empty()) a.cfg.checkpoint = a.ckpt;
  if (!a.collection.empty()) a.cfg.collection = a.collection;
  a.cfg.apply_environment();
  if (a.cfg.checkpoint.empty()) throw ValidationError("a checkpoint is required (--ckpt or SHAPES2TOON_CKPT)", "--ckpt");
  service::Service svc(a.cfg);
  g_running_service = &svc;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  svc.serve([&](int port) {
    std::cerr << "listening on http://" << a.cfg.host << ":" << port << " (checkpoint " << svc.checkpoint_id()
              << ", " << svc.collection_size() << " samples)\n";
  });
  g_running_service = nullptr;
  return 0;
}

int cmd_plot(const PlotArgs& a) {
  plot::write_loss_curves(train::LossLog::load(a.csv), a.out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"shapes2toon: shape layouts to cartoon faces with pix2pix", "shapes2toon"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth-data", "Generate a synthetic paired corpus");
  s->add_option("--n", synth.n, "number of base pairs")->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "random seed");
  s->add_option("--size", synth.size, "image size in pixels");
  s->add_option("--out", synth.out, "output corpus directory")->required();

  AugmentArgs aug;
  auto* au = app.add_subcommand("augment", "Expand a corpus with geometric variants");
  au->add_option("--in", aug.in, "base corpus directory")->required();
  au->add_option("--out", aug.out, "output corpus directory")->required();
  au->add_option("--per-base", aug.per_base, "variants per base pair, identity included");
  au->add_option("--seed", aug.seed, "random seed");
  au->add_option("--max-rotate", aug.max_rotate, "max rotation in degrees");
  au->add_option("--min-scale", aug.min_scale);
  au->add_option("--max-scale", aug.max_scale);
  au->add_option("--max-translate", aug.max_translate, "max shift as a fraction of the width");
  au->add_flag("--no-flip", aug.no_flip, "disable horizontal flips");

  FitArgs fitargs;
  auto* fi = app.add_subcommand("fit", "Fit circles and ovals to a toon image");
  fi->add_option("--image", fitargs.image, "PNG image or joined pair")->required();
  fi->add_option("--half", fitargs.half, "auto, whole, source or target");
  fi->add_option("--out", fitargs.out, "layout document (stdout if omitted)");
  fi->add_option("--r-min", fitargs.hough.r_min);
  fi->add_option("--r-max", fitargs.hough.r_max);
  fi->add_option("--threshold", fitargs.hough.threshold);
  fi->add_option("--edge-threshold", fitargs.hough.edge_threshold);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the pix2pix model on a corpus");
  t->add_option("--corpus", tr.corpus, "corpus directory")->required();
  t->add_option("--out", tr.out, "run directory")->required();
  t->add_option("--epochs", tr.cfg.epochs);
  t->add_option("--seed", tr.cfg.seed);
  t->add_option("--image-size", tr.cfg.image_size);
  t->add_option("--lr", tr.cfg.lr);
  t->add_option("--batch-size", tr.cfg.batch_size);
  t->add_option("--beta1", tr.cfg.beta1);
  t->add_option("--beta2", tr.cfg.beta2);
  t->add_option("--lambda-l1", tr.cfg.lambda_l1);
  t->add_option("--ng", tr.cfg.ng);
  t->add_option("--nd", tr.cfg.nd);
  t->add_option("--train-fraction", tr.cfg.train_fraction);
  t->add_option("--checkpoint-every", tr.cfg.checkpoint_every);
  t->add_option("--log-every", tr.log_every);

  InferArgs inf;
  auto* in = app.add_subcommand("infer", "Translate a layout or source image");
  in->add_option("--ckpt", inf.ckpt, "checkpoint directory")->required();
  in->add_option("--layout", inf.layout, "layout document");
  in->add_option("--image", inf.image, "source PNG");
  in->add_option("--out", inf.out, "output PNG")->required();
  in->add_option("--seed", inf.seed, "dropout seed");

  FidArgs fa;
  auto* f = app.add_subcommand("fid", "Evaluate a checkpoint on a corpus");
  f->add_option("--ckpt", fa.ckpt, "checkpoint directory")->required();
  f->add_option("--corpus", fa.corpus, "corpus directory")->required();
  f->add_option("--split", fa.split, "split.json from a training run");
  f->add_option("--out", fa.out, "report path");
  f->add_option("--seed", fa.seed, "split and dropout seed");
  f->add_option("--train-fraction", fa.train_fraction);
  f->add_flag("--all", fa.all, "evaluate on every pair");
  f->add_option("--extractor-seed", fa.extractor_seed);

  ServeArgs sa;
  auto* sv = app.add_subcommand("serve", "Run the HTTP inference service");
  sv->add_option("--ckpt", sa.ckpt, "checkpoint directory");
  sv->add_option("--collection", sa.collection, "corpus directory for /api/random");
  sv->add_option("--host", sa.cfg.host);
  sv->add_option("--port", sa.cfg.port);
  sv->add_option("--workers", sa.cfg.workers);
  sv->add_option("--max-body", sa.cfg.max_body_bytes, "bytes");
  sv->add_option("--seed", sa.cfg.dropout_seed, "default dropout seed");

  PlotArgs pa;
  auto* p = app.add_subcommand("plot-losses", "Render loss curves");
  p->add_option("--csv", pa.csv, "losses.csv")->required();
  p->add_option("--out", pa.out, ".svg or .png")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto sub = app.get_subcommands();
    std::cerr << (sub.empty() ? app.help() : sub.front()->help());
    return 1;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (au->parsed()) return cmd_augment(aug);
    if (fi->parsed()) return cmd_fit(fitargs);
    if (t->parsed()) return cmd_train(tr);
    if (in->parsed()) return cmd_infer(inf);
    if (f->parsed()) return cmd_fid(fa);
    if (sv->parsed()) return cmd_serve(sa);
    if (p->parsed()) return cmd_plot(pa);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace s2t::cli
