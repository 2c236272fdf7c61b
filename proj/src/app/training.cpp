// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/app/training.hpp"

#include <algorithm>
#include <cmath>

#include "mptrack/common/error.hpp"
#include "mptrack/metrics/geometry.hpp"
#include "mptrack/metrics/losses.hpp"
#include "mptrack/nn/transformer.hpp"
#include "mptrack/trackhead/feature_bank.hpp"

namespace mptrack::app {

namespace {

constexpr double kWeightDecay = 1e-4;
constexpr int kHeldoutWindows = 256;

torch::optim::AdamW make_adamw(std::vector<torch::Tensor> params, double lr) {
  return torch::optim::AdamW(std::move(params),
                             torch::optim::AdamWOptions(lr).weight_decay(kWeightDecay));
}

std::vector<torch::Tensor> trainable(torch::nn::Module& m) {
  std::vector<torch::Tensor> out;
  for (auto& p : m.parameters(true)) {
    if (p.requires_grad()) out.push_back(p);
  }
  return out;
}

void check_finite(double v, const std::string& stage, int step) {
  if (!std::isfinite(v)) {
    fail(ErrorCategory::kDivergence,
         stage + " diverged: non-finite loss at step " + std::to_string(step));
  }
}

}  // namespace

void configure_torch() {
  torch::set_num_threads(1);
  at::set_num_interop_threads(1);
}

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kHeldout: return "heldout";
    case Split::kEval: return "eval";
    case Split::kOcclusion: return "occlusion";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "heldout") return Split::kHeldout;
  if (name == "eval") return Split::kEval;
  if (name == "occlusion") return Split::kOcclusion;
  fail(ErrorCategory::kConfig, "unknown split " + name + " (train, heldout, eval, occlusion)");
}

std::vector<synth::SyntheticSequence> make_split(const RunConfig& config, Split split) {
  auto options = config.scenario();
  int count = config.train_sequences;
  switch (split) {
    case Split::kTrain: break;
    case Split::kHeldout: count = config.heldout_sequences; break;
    case Split::kEval: count = config.eval_sequences; break;
    case Split::kOcclusion:
      count = config.occlusion_sequences;
      options.full_occlusion_frames = config.full_occlusion_frames;
      break;
  }
  return synth::generate_dataset(options, count, derive_seed(config.data_seed, to_string(split)));
}

head::TrackerNet clone_net(head::TrackerNet& net) {
  head::TrackerNet copy(net->profile());
  if (net->has_projnet()) copy->enable_projnet();
  nn::copy_parameters(*net, *copy);
  return copy;
}

HeadLossValue head_loss(head::TrackerNet& net, const head::PredictorOutput& pred,
                        const head::LabelBatch& labels, double cls_weight, double reg_weight) {
  auto maps = net->head(pred.omega, pred.z);
  auto cls = metrics::hinge_cls_loss(maps.scores, labels.cls);
  auto reg = metrics::ltrb_giou_loss(maps.ltrb, labels.reg, labels.valid);
  HeadLossValue out;
  out.total = cls_weight * cls + reg_weight * reg;
  out.cls = cls.item<double>();
  out.reg = reg.item<double>();
  return out;
}

head::TrackerNet train_teacher(const RunConfig& config,
                               const std::vector<synth::SyntheticSequence>& train,
                               std::vector<EpochLog>* log) {
  const auto profile = config.profile();
  const auto grid = profile.grid_spec();
  torch::manual_seed(derive_seed(config.seed, "teacher-init"));
  head::TrackerNet net(profile);
  net->train();
  auto optimizer = make_adamw(net->parameters(), config.teacher_lr);
  Rng rng(derive_seed(config.seed, "teacher-batches"));
  auto windows = sample_windows(train, config.max_window_step, config.teacher_windows,
                                derive_seed(config.seed, "teacher-windows"));
  const int batch = config.teacher_batch;
  int step = 0;
  for (int epoch = 0; epoch < config.teacher_epochs; ++epoch) {
    std::shuffle(windows.begin(), windows.end(), rng);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i + batch <= windows.size(); i += batch) {
      std::vector<const synth::Image*> imgs;
      std::vector<Box> ba, bb, bc;
      for (int k = 0; k < batch; ++k) {
        const auto& w = windows[i + k];
        const auto& seq = train[w.sequence];
        imgs.push_back(&seq.frames[w.reference_a()]);
        ba.push_back(seq.gt_boxes[w.reference_a()]);
      }
      for (int k = 0; k < batch; ++k) {
        const auto& w = windows[i + k];
        imgs.push_back(&train[w.sequence].frames[w.reference_b()]);
        bb.push_back(train[w.sequence].gt_boxes[w.reference_b()]);
      }
      for (int k = 0; k < batch; ++k) {
        const auto& w = windows[i + k];
        imgs.push_back(&train[w.sequence].frames[w.current()]);
        bc.push_back(train[w.sequence].gt_boxes[w.current()]);
      }
      auto feats = net->encode_frame(head::image_batch(imgs));
      auto parts = feats.split(batch, 0);
      auto refs = head::make_reference_set(parts[0], parts[1], ba, bb, grid);
      auto pred = net->predict(refs, parts[2]);
      auto loss = head_loss(net, pred, head::encode_label_batch(bc, grid), config.head_cls_weight,
                            config.head_reg_weight);
      const double v = loss.total.item<double>();
      check_finite(v, "train-stage0 (teacher)", step);
      optimizer.zero_grad();
      loss.total.backward();
      optimizer.step();
      sum += v;
      ++count;
      ++step;
    }
    if (log != nullptr) log->push_back({epoch, count > 0 ? sum / count : 0.0});
  }
  net->eval();
  return net;
}

PointWindow make_point_window(const synth::SyntheticSequence& seq, const synth::WindowSpec& w,
                              int points, double noise, Rng& rng) {
  const auto frames = w.frames();
  const int t = static_cast<int>(frames.size());
  const int f0 = frames[0];
  const Box& box = seq.gt_boxes[f0];
  PointWindow out;
  std::vector<torch::Tensor> imgs;
  for (int f : frames) imgs.push_back(head::image_tensor(seq.frames[f]));
  out.images = torch::stack(imgs);
  out.gt = torch::empty({points, t, 2});
  out.gt_vis = torch::empty({points, t});
  auto g = out.gt.accessor<float, 3>();
  auto v = out.gt_vis.accessor<float, 2>();
  for (int i = 0; i < points; ++i) {
    double x = 0.0, y = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
      x = uniform(rng, box.x0, box.x1);
      y = uniform(rng, box.y0, box.y1);
      if (seq.point_visible(f0, x, y)) break;
    }
    for (int k = 0; k < t; ++k) {
      double xt = 0.0, yt = 0.0;
      seq.track_point(f0, x, y, frames[k], xt, yt);
      g[i][k][0] = static_cast<float>(xt);
      g[i][k][1] = static_cast<float>(yt);
      v[i][k] = seq.point_visible(frames[k], xt, yt) ? 1.0f : 0.0f;
    }
  }
  auto jitter = torch::empty({points, t, 2});
  auto j = jitter.accessor<float, 3>();
  for (int i = 0; i < points; ++i) {
    for (int k = 0; k < t; ++k) {
      j[i][k][0] = static_cast<float>(uniform(rng, -noise, noise));
      j[i][k][1] = static_cast<float>(uniform(rng, -noise, noise));
    }
  }
  out.coords0 = out.gt + jitter;
  return out;
}

PointBatch stack_point_windows(const std::vector<PointWindow>& windows) {
  std::vector<torch::Tensor> a, b, c, d;
  for (const auto& w : windows) {
    a.push_back(w.images);
    b.push_back(w.gt);
    c.push_back(w.gt_vis);
    d.push_back(w.coords0);
  }
  return {torch::stack(a), torch::stack(b), torch::stack(c), torch::stack(d)};
}

namespace {

synth::WindowSpec random_window(const std::vector<synth::SyntheticSequence>& seqs, int max_step,
                                Rng& rng) {
  synth::WindowSpec w;
  w.sequence = uniform_int(rng, 0, static_cast<int>(seqs.size()) - 1);
  const int n = seqs[w.sequence].num_frames();
  w.step = uniform_int(rng, 1, std::max(1, std::min(max_step, (n - 1) / 7)));
  w.start = uniform_int(rng, 0, n - 1 - 7 * w.step);
  return w;
}

}  // namespace

occu::PointTracker train_point_tracker(const RunConfig& config,
                                       const std::vector<synth::SyntheticSequence>& train,
                                       std::vector<EpochLog>* log) {
  torch::manual_seed(derive_seed(config.seed, "point-tracker-init"));
  auto occfg = config.occu_config();
  occu::PointTracker tracker(occfg.tracker);
  tracker->train();
  auto optimizer = make_adamw(tracker->parameters(), config.tracker_lr);
  Rng rng(derive_seed(config.seed, "point-tracker-batches"));
  const int report_every = 100;
  double sum = 0.0;
  for (int step = 0; step < config.tracker_steps; ++step) {
    std::vector<PointWindow> ws;
    for (int b = 0; b < config.tracker_batch; ++b) {
      const auto w = random_window(train, config.max_window_step, rng);
      ws.push_back(make_point_window(train[w.sequence], w, config.num_points,
                                     config.tracker_init_noise, rng));
    }
    auto batch = stack_point_windows(ws);
    auto feats = tracker->features(batch.images);
    auto q0 = tracker->initial_appearance(feats, batch.coords0.select(2, 0));
    auto out = tracker->iterate(batch.coords0, q0, feats, occfg.tracker.iterations);
    auto coord_loss = (out.coords - batch.gt).abs().mean() / 4.0;
    auto vis_loss =
        torch::binary_cross_entropy(tracker->visibility(out.delta_q).clamp(1e-6, 1.0 - 1e-6),
                                    batch.gt_vis);
    auto loss = coord_loss + vis_loss;
    const double v = loss.item<double>();
    check_finite(v, "train-stage0 (point tracker)", step);
    optimizer.zero_grad();
    loss.backward();
    optimizer.step();
    sum += v;
    if ((step + 1) % report_every == 0) {
      if (log != nullptr) log->push_back({step + 1, sum / report_every});
      sum = 0.0;
    }
  }
  tracker->eval();
  return tracker;
}

std::vector<synth::WindowSpec> sample_windows(const std::vector<synth::SyntheticSequence>& seqs,
                                              int max_step, int count, std::uint64_t seed) {
  auto all = synth::enumerate_windows(seqs, max_step);
  Rng rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  if (count > 0 && static_cast<std::size_t>(count) < all.size()) all.resize(count);
  return all;
}

PretrainOutcome pretrain_jepa(const RunConfig& config, head::TrackerNet& teacher,
                              const std::vector<synth::SyntheticSequence>& train,
                              const std::vector<synth::SyntheticSequence>& heldout) {
  auto frozen = clone_net(teacher);
  jepa::JepaModel model(frozen, 4, derive_seed(config.seed, "jepa-init"));
  auto train_bank = head::encode_sequences(model.teacher(), train);
  auto held_bank = head::encode_sequences(model.teacher(), heldout);
  const auto train_windows = sample_windows(train, config.max_window_step, config.jepa_windows,
                                            derive_seed(config.seed, "jepa-windows"));
  const auto held_windows = sample_windows(heldout, config.max_window_step, kHeldoutWindows,
                                           derive_seed(config.data_seed, "jepa-heldout"));
  PretrainOutcome out;
  out.result = jepa::pretrain(model, train_bank, train_windows, held_bank, held_windows,
                              config.pretrain_config());
  out.student = model.student();
  out.expander = model.expander();
  return out;
}

head::TrackerNet train_head(const RunConfig& config, head::TrackerNet& init,
                            const std::vector<synth::SyntheticSequence>& train,
                            std::vector<EpochLog>* log) {
  auto net = clone_net(init);
  const auto grid = net->profile().grid_spec();
  nn::set_trainable(*net->encoder(), false);
  auto bank = head::encode_sequences(net, train);
  net->train();
  auto optimizer = make_adamw(trainable(*net), config.head_lr);
  auto windows = sample_windows(train, config.max_window_step, config.head_windows,
                                derive_seed(config.seed, "head-windows"));
  Rng rng(derive_seed(config.seed, "head-batches"));
  const int batch = config.head_batch;
  int step = 0;
  for (int epoch = 0; epoch < config.head_epochs; ++epoch) {
    std::shuffle(windows.begin(), windows.end(), rng);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i + batch <= windows.size(); i += batch) {
      const std::span<const synth::WindowSpec> chunk(windows.data() + i, batch);
      auto wb = head::gather_windows(bank, chunk, grid);
      auto pred = net->predict(wb.refs, wb.cur);
      auto loss = head_loss(net, pred, wb.cur_labels, config.head_cls_weight,
                            config.head_reg_weight);
      const double v = loss.total.item<double>();
      check_finite(v, "train-head", step);
      optimizer.zero_grad();
      loss.total.backward();
      optimizer.step();
      sum += v;
      ++count;
      ++step;
    }
    if (log != nullptr) log->push_back({epoch, count > 0 ? sum / count : 0.0});
  }
  nn::set_trainable(*net->encoder(), true);
  net->eval();
  return net;
}

namespace {

struct OccuBatch {
  occu::OccuInput input;
  torch::Tensor gt_vis;  // [B, P, T]
  torch::Tensor omega;
  head::LabelBatch labels;
};

OccuBatch make_occu_batch(const RunConfig& config, head::TrackerNet& net,
                          const head::FeatureBank& bank,
                          const std::vector<synth::SyntheticSequence>& seqs, Rng& rng,
                          int batch) {
  const auto grid = net->profile().grid_spec();
  std::vector<synth::WindowSpec> windows;
  std::vector<PointWindow> pws;
  std::vector<torch::Tensor> pf, pm;
  for (int b = 0; b < batch; ++b) {
    auto w = random_window(seqs, config.max_window_step, rng);
    const auto& seq = seqs[w.sequence];
    pws.push_back(
        make_point_window(seq, w, config.num_points, config.tracker_init_noise, rng));
    pf.push_back(synth::encode_cls_label(seq.gt_boxes[w.frame(0)], grid).values);
    pm.push_back(synth::encode_cls_label(
                     seq.gt_boxes[w.frame(occu::middle_frame_index(synth::kWindowLength))], grid)
                     .values);
    windows.push_back(w);
  }
  auto pb = stack_point_windows(pws);
  auto wb = head::gather_windows(bank, windows, grid);
  OccuBatch out;
  {
    torch::NoGradGuard no_grad;
    auto pred = net->predict(wb.refs, wb.cur);
    out.omega = pred.omega;
    out.input.z_cur = pred.z;
  }
  out.input.images = pb.images;
  out.input.coords0 = pb.coords0;
  out.input.prior_first = torch::stack(pf);
  out.input.prior_middle = torch::stack(pm);
  out.gt_vis = pb.gt_vis;
  out.labels = wb.cur_labels;
  return out;
}

}  // namespace

occu::OccuSolver train_occusolver(const RunConfig& config, head::TrackerNet& net,
                                  occu::PointTracker& tracker,
                                  const std::vector<synth::SyntheticSequence>& train,
                                  std::vector<OccuTrainLog>* log) {
  torch::manual_seed(derive_seed(config.seed, "occusolver-init"));
  occu::OccuSolver solver(net->profile(), config.occu_config());
  nn::copy_parameters(*tracker, *solver->tracker());
  solver->freeze_tracker();
  net->eval();
  nn::set_trainable(*net, false);
  auto bank = head::encode_sequences(net, train);
  solver->adapters()->train();
  auto optimizer = make_adamw(solver->adapters()->parameters(), config.occu_lr);
  Rng rng(derive_seed(config.seed, "occusolver-batches"));
  const auto lambdas = config.lambdas();
  for (int step = 0; step < config.occu_steps; ++step) {
    auto batch = make_occu_batch(config, net, bank, train, rng, config.occu_batch);
    auto out = solver->forward(batch.input);
    auto loss = occu::occusolver_loss(net->regdec(), batch.omega, out.fused.e_tilde,
                                      out.fused.z_tilde, batch.labels.cls, batch.labels.reg,
                                      batch.labels.valid, lambdas);
    auto vis = torch::binary_cross_entropy(out.vis_prob.clamp(1e-6, 1.0 - 1e-6), batch.gt_vis);
    auto total = loss.total + config.vis_weight * vis;
    const double v = total.item<double>();
    check_finite(v, "train-occusolver", step);
    optimizer.zero_grad();
    total.backward();
    optimizer.step();
    if (log != nullptr) log->push_back({step, loss.components, vis.item<double>()});
  }
  nn::set_trainable(*net, true);
  solver->eval();
  return solver;
}

VisibilityAccuracy evaluate_visibility(const RunConfig& config, occu::OccuSolver& solver,
                                       const std::vector<synth::SyntheticSequence>& seqs,
                                       int windows, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  solver->eval();
  const auto grid = solver->profile().grid_spec();
  Rng rng(seed);
  VisibilityAccuracy acc;
  double hits_v = 0.0, hits_f = 0.0;
  for (int i = 0; i < windows; ++i) {
    auto w = random_window(seqs, config.max_window_step, rng);
    const auto& seq = seqs[w.sequence];
    auto pw = make_point_window(seq, w, solver->config().num_points, config.tracker_init_noise,
                                rng);
    occu::OccuInput in;
    in.images = pw.images.unsqueeze(0);
    in.coords0 = pw.coords0.unsqueeze(0);
    in.prior_first = synth::encode_cls_label(seq.gt_boxes[w.frame(0)], grid).values.unsqueeze(0);
    in.prior_middle =
        synth::encode_cls_label(seq.gt_boxes[w.frame(occu::middle_frame_index(8))], grid)
            .values.unsqueeze(0);
    in.z_cur = torch::zeros({1, solver->profile().channels, grid.height, grid.width});
    auto out = solver->forward(in);
    auto frozen = solver->track_frozen(in.images, in.coords0).second;
    auto gt = pw.gt_vis.unsqueeze(0) > 0.5;
    hits_v += (occu::binarize_visibility(out.vis_prob) == gt).sum().item<double>();
    hits_f += (occu::binarize_visibility(frozen) == gt).sum().item<double>();
    acc.samples += gt.numel();
  }
  acc.vishead = acc.samples > 0 ? hits_v / static_cast<double>(acc.samples) : 0.0;
  acc.frozen = acc.samples > 0 ? hits_f / static_cast<double>(acc.samples) : 0.0;
  return acc;
}

std::vector<metrics::FramePrediction> to_predictions(const runtime::TrackResult& track) {
  std::vector<metrics::FramePrediction> out;
  for (const auto& r : track.frames) out.push_back({r.box, r.peak_score});
  return out;
}

BenchmarkEval evaluate_tracker(const RunConfig& config, head::TrackerNet& net,
                               occu::OccuSolver occusolver,
                               const std::vector<synth::SyntheticSequence>& seqs) {
  auto options = config.tracker_options();
  options.use_occusolver = !occusolver.is_empty();
  runtime::Tracker tracker(net, occusolver, options);
  BenchmarkEval out;
  std::vector<metrics::MetricReport> all, heavy;
  for (const auto& seq : seqs) {
    SequenceEval e;
    e.track = tracker.run(seq);
    const auto preds = to_predictions(e.track);
    e.report = metrics::eval_sequence(preds, seq.gt_boxes, config.eval_options());
    e.occlusion_heavy = synth::occlusion_heavy(seq);
    all.push_back(e.report);
    if (e.occlusion_heavy) heavy.push_back(e.report);
    out.sequences.push_back(std::move(e));
  }
  out.overall = metrics::average_reports(all);
  out.heavy_count = static_cast<int>(heavy.size());
  if (!heavy.empty()) out.occlusion_heavy = metrics::average_reports(heavy);
  return out;
}

int reappearance_frame(const synth::SyntheticSequence& seq, int min_hidden) {
  int best_len = 0, best_end = -1, run = 0;
  for (int t = 0; t < seq.num_frames(); ++t) {
    if (seq.gt_point_visibility[t] <= 0.0) {
      ++run;
      if (run > best_len) {
        best_len = run;
        best_end = t;
      }
    } else {
      run = 0;
    }
  }
  if (best_len < min_hidden || best_end + 1 >= seq.num_frames()) return -1;
  return best_end + 1;
}

bool recovered(const runtime::TrackResult& track, const synth::SyntheticSequence& seq, int r,
               int within) {
  if (r < 0) return false;
  for (int t = r; t <= std::min(r + within, seq.num_frames() - 1); ++t) {
    if (metrics::iou(track.frames[t].box, seq.gt_boxes[t]) > 0.5) return true;
  }
  return false;
}

}  // namespace mptrack::app
