// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/synthdata/sequence_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mptrack/common/error.hpp"

namespace mptrack::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const fs::path& file, const std::string& field,
                              const std::string& what) {
  fail(ErrorCategory::kParse, file.string() + ": field '" + field + "': " + what);
}

/// Reads a required member, converting nlohmann errors into parse errors that
/// carry the file and field name.
template <typename T>
T field(const json& j, const std::string& key, const fs::path& file,
        const std::string& prefix = "") {
  const std::string name = prefix.empty() ? key : prefix + "." + key;
  if (!j.is_object() || !j.contains(key)) parse_error(file, name, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_error(file, name, e.what());
  }
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.pgm", index);
  return buf;
}

json object_to_json(const ObjectSpec& o) {
  return {{"texture", static_cast<int>(o.texture)},
          {"texture_seed", o.texture_seed},
          {"width", o.width},
          {"height", o.height},
          {"vx", o.vx},
          {"vy", o.vy}};
}

ObjectSpec object_from_json(const json& j) {
  ObjectSpec o;
  const int kind = j.at("texture").get<int>();
  if (kind < 0 || kind > 2) throw std::out_of_range("texture kind " + std::to_string(kind));
  o.texture = static_cast<TextureKind>(kind);
  o.texture_seed = j.at("texture_seed").get<std::uint64_t>();
  o.width = j.at("width").get<double>();
  o.height = j.at("height").get<double>();
  o.vx = j.at("vx").get<double>();
  o.vy = j.at("vy").get<double>();
  return o;
}

}  // namespace

json box_to_json(const Box& box) { return json::array({box.x0, box.y0, box.x1, box.y1}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x0, y0, x1, y1]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json config_to_json(const SynthConfig& cfg) {
  json distractors = json::array();
  for (const auto& d : cfg.distractors) distractors.push_back(object_to_json(d));
  json occluders = json::array();
  for (const auto& o : cfg.occluders) {
    occluders.push_back({{"enter_frame", o.enter_frame},
                         {"exit_frame", o.exit_frame},
                         {"coverage", o.coverage}});
  }
  return {{"image_size", cfg.image_size},
          {"grid_size", cfg.grid_size},
          {"num_frames", cfg.num_frames},
          {"target", object_to_json(cfg.target)},
          {"distractors", distractors},
          {"occluders", occluders},
          {"noise_std", cfg.noise_std},
          {"seed", cfg.seed}};
}

SynthConfig config_from_json(const json& j) {
  SynthConfig cfg;
  cfg.image_size = j.at("image_size").get<int>();
  cfg.grid_size = j.at("grid_size").get<int>();
  cfg.num_frames = j.at("num_frames").get<int>();
  cfg.target = object_from_json(j.at("target"));
  for (const auto& d : j.at("distractors")) cfg.distractors.push_back(object_from_json(d));
  for (const auto& o : j.at("occluders")) {
    cfg.occluders.push_back({o.at("enter_frame").get<int>(), o.at("exit_frame").get<int>(),
                             o.at("coverage").get<double>()});
  }
  cfg.noise_std = j.at("noise_std").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

void write_pgm(const Image& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  require(out.good(), ErrorCategory::kIo, "short write to " + path.string());
}

Image read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::kIo, "cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  Image img;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || magic != "P5") parse_error(path, "header", "expected binary PGM (P5)");
  if (maxval != 255) parse_error(path, "maxval", "only 8-bit PGM is supported");
  if (img.width <= 0 || img.height <= 0) parse_error(path, "size", "non-positive dimensions");
  in.get();  // single whitespace after the header
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    parse_error(path, "pixels", "truncated pixel data");
  }
  return img;
}

void save_sequence(const SyntheticSequence& seq, const fs::path& dir) {
  fs::create_directories(dir / "frames");
  for (int t = 0; t < seq.num_frames(); ++t) {
    write_pgm(seq.frames[t], dir / "frames" / frame_name(t));
  }
  json frames = json::array();
  for (int t = 0; t < seq.num_frames(); ++t) {
    json occ = json::array();
    for (const auto& b : seq.occluder_boxes[t]) occ.push_back(box_to_json(b));
    json dis = json::array();
    for (const auto& b : seq.distractor_boxes[t]) dis.push_back(box_to_json(b));
    frames.push_back({{"index", t},
                      {"box", box_to_json(seq.gt_boxes[t])},
                      {"visibility", seq.gt_point_visibility[t]},
                      {"occluded", seq.attributes[t].occluded},
                      {"distractor_near", seq.attributes[t].distractor_near},
                      {"occluders", occ},
                      {"distractors", dis}});
  }
  const json doc = {{"version", kSequenceFormatVersion},
                    {"config", config_to_json(seq.config)},
                    {"frames", frames}};
  const fs::path path = dir / "annotations.json";
  std::ofstream out(path);
  require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
  out << doc.dump(1) << "\n";
}

SyntheticSequence load_sequence(const fs::path& dir) {
  const fs::path path = dir / "annotations.json";
  std::ifstream in(path);
  require(in.good(), ErrorCategory::kIo, "cannot open " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  json doc;
  try {
    doc = json::parse(text.str());
  } catch (const json::parse_error& e) {
    parse_error(path, "<document>", e.what());
  }
  const int version = field<int>(doc, "version", path);
  if (version != kSequenceFormatVersion) {
    fail(ErrorCategory::kUnsupportedVersion,
         path.string() + ": unsupported sequence format version " +
             std::to_string(version) + " (expected " +
             std::to_string(kSequenceFormatVersion) + ")");
  }
  SyntheticSequence seq;
  if (!doc.contains("config")) parse_error(path, "config", "missing");
  try {
    seq.config = config_from_json(doc.at("config"));
  } catch (const std::exception& e) {
    parse_error(path, "config", e.what());
  }
  if (!doc.contains("frames") || !doc.at("frames").is_array()) {
    parse_error(path, "frames", "missing or not an array");
  }
  const auto& frames = doc.at("frames");
  if (static_cast<int>(frames.size()) != seq.config.num_frames) {
    parse_error(path, "frames", "expected " + std::to_string(seq.config.num_frames) +
                                    " records, found " + std::to_string(frames.size()));
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& f = frames[t];
    const std::string prefix = "frames[" + std::to_string(t) + "]";
    auto boxes = [&](const std::string& key) {
      std::vector<Box> out;
      for (const auto& b : field<json>(f, key, path, prefix)) {
        try {
          out.push_back(box_from_json(b));
        } catch (const std::exception& e) {
          parse_error(path, prefix + "." + key, e.what());
        }
      }
      return out;
    };
    Box box;
    try {
      box = box_from_json(field<json>(f, "box", path, prefix));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      parse_error(path, prefix + ".box", e.what());
    }
    seq.gt_boxes.push_back(box);
    seq.gt_point_visibility.push_back(field<double>(f, "visibility", path, prefix));
    seq.attributes.push_back({field<bool>(f, "occluded", path, prefix),
                              field<bool>(f, "distractor_near", path, prefix)});
    seq.occluder_boxes.push_back(boxes("occluders"));
    seq.distractor_boxes.push_back(boxes("distractors"));
    seq.gt_target_mask.push_back(
        target_mask(box, seq.config.grid_size, seq.config.stride()));
    Image img = read_pgm(dir / "frames" / frame_name(static_cast<int>(t)));
    if (img.width != seq.config.image_size || img.height != seq.config.image_size) {
      parse_error(dir / "frames" / frame_name(static_cast<int>(t)), "size",
                  "does not match config.image_size");
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

}  // namespace mptrack::synth
