#include "flowtrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "flowtrack/motion.hpp"
#include "flowtrack/tracker.hpp"

namespace flowtrack {

namespace {

constexpr float kFloMagic = 202021.25f;

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(strip(cur));
  return fields;
}

double parse_real(const std::string& s, const std::string& path, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw format_error(path + ":" + std::to_string(line_no) +
                       ": malformed numeric field '" + s + "'");
  }
}

long parse_int(const std::string& s, const std::string& path, int line_no) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw format_error(path + ":" + std::to_string(line_no) +
                       ": malformed integer field '" + s + "'");
  }
  return v;
}

std::ifstream open_input(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw file_not_found_error("file not found: " + path);
  }
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  return in;
}

std::vector<MotRecord> read_csv_records(const std::string& path,
                                        size_t min_fields, bool visdrone) {
  std::ifstream in = open_input(path);
  std::vector<MotRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty()) continue;
    const auto f = split_csv(t);
    if (f.size() < min_fields) {
      throw format_error(path + ":" + std::to_string(line_no) + ": expected >= " +
                         std::to_string(min_fields) + " fields, got " +
                         std::to_string(f.size()));
    }
    MotRecord r;
    r.frame = static_cast<int>(parse_int(f[0], path, line_no));
    r.id = parse_int(f[1], path, line_no);
    const double left = parse_real(f[2], path, line_no);
    const double top = parse_real(f[3], path, line_no);
    const double w = parse_real(f[4], path, line_no);
    const double h = parse_real(f[5], path, line_no);
    r.conf = parse_real(f[6], path, line_no);
    r.class_id = static_cast<int>(parse_int(f[7], path, line_no));
    r.visibility = visdrone ? 0.0 : parse_real(f[8], path, line_no);
    if (visdrone && r.class_id == 0) {
      r.ignore_region = true;
    }
    if (w <= 0.0 || h <= 0.0) {
      std::cerr << "warning: " << path << ":" << line_no
                << ": non-positive box size, row skipped\n";
      continue;
    }
    r.box = BBox::from_ltwh(left, top, w, h);
    out.push_back(r);
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream outf(tmp, std::ios::binary | std::ios::trunc);
    if (!outf) throw io_error("cannot write: " + tmp);
    outf << content;
    if (!outf) throw io_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

float u32_to_float(uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

void write_u32_le(std::ostream& out, uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t float_to_u32(float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  return bits;
}

}  // namespace

std::vector<MotRecord> read_mot_csv(const std::string& path) {
  return read_csv_records(path, 9, false);
}

std::vector<MotRecord> read_visdrone_csv(const std::string& path) {
  return read_csv_records(path, 10, true);
}

std::map<int, std::vector<Detection>> detections_by_frame(
    const std::vector<MotRecord>& records) {
  std::map<int, std::vector<Detection>> out;
  for (const MotRecord& r : records) {
    if (r.ignore_region) continue;
    Detection d;
    d.frame = r.frame;
    d.bbox = r.box;
    d.score = r.conf;
    d.class_id = r.class_id;
    auto& frame = out[r.frame];
    d.det_index = static_cast<int>(frame.size());
    frame.push_back(d);
  }
  return out;
}

std::vector<TrackRecord> tracks_from_records(const std::vector<MotRecord>& records) {
  std::map<long, TrackRecord> by_id;
  std::map<long, std::pair<double, long>> conf_acc;
  for (const MotRecord& r : records) {
    if (r.ignore_region || r.id < 0) continue;
    TrackRecord& t = by_id[r.id];
    t.id = r.id;
    t.class_id = r.class_id;
    t.boxes[r.frame] = r.box;
    auto& [sum, n] = conf_acc[r.id];
    sum += r.conf;
    ++n;
  }
  std::vector<TrackRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, t] : by_id) {
    const auto& [sum, n] = conf_acc[id];
    t.confidence = n > 0 ? sum / static_cast<double>(n) : 0.0;
    out.push_back(std::move(t));
  }
  return out;
}

IgnoreRegions ignore_regions_from_records(const std::vector<MotRecord>& records) {
  IgnoreRegions out;
  for (const MotRecord& r : records) {
    if (r.ignore_region) out[r.frame].push_back(r.box);
  }
  return out;
}

MotionField read_flo(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw file_not_found_error("file not found: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path);
  const float magic = u32_to_float(read_u32_le(in));
  if (!in || magic != kFloMagic) {
    throw format_error(path + ": bad .flo magic");
  }
  const int32_t w = static_cast<int32_t>(read_u32_le(in));
  const int32_t h = static_cast<int32_t>(read_u32_le(in));
  if (!in || w <= 0 || h <= 0) {
    throw format_error(path + ": bad .flo dimensions");
  }
  const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
  std::vector<float> u(n), v(n);
  for (size_t i = 0; i < n; ++i) {
    u[i] = u32_to_float(read_u32_le(in));
    v[i] = u32_to_float(read_u32_le(in));
    if (!in) throw format_error(path + ": truncated .flo payload");
  }
  return MotionField::dense(w, h, std::move(u), std::move(v));
}

void write_flo(const MotionField& field, const std::string& path) {
  const auto* g = field.grid();
  if (g == nullptr) {
    throw std::invalid_argument("write_flo: only dense fields are writable");
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write: " + tmp);
    write_u32_le(out, float_to_u32(kFloMagic));
    write_u32_le(out, static_cast<uint32_t>(g->width));
    write_u32_le(out, static_cast<uint32_t>(g->height));
    const size_t n = static_cast<size_t>(g->width) * static_cast<size_t>(g->height);
    for (size_t i = 0; i < n; ++i) {
      write_u32_le(out, float_to_u32(g->u[i]));
      write_u32_le(out, float_to_u32(g->v[i]));
    }
    if (!out) throw io_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::map<int, MotionField> read_flow_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::map<int, MotionField> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_csv(t);
    if (f.size() != 7) {
      throw format_error(path + ":" + std::to_string(line_no) +
                         ": expected frame,a,b,c,d,e,f");
    }
    const int frame = static_cast<int>(parse_int(f[0], path, line_no));
    double coef[6];
    for (int i = 0; i < 6; ++i) coef[i] = parse_real(f[i + 1], path, line_no);
    out[frame] = MotionField::affine(coef[0], coef[1], coef[2], coef[3], coef[4],
                                     coef[5]);
  }
  return out;
}

std::string format_results(const std::vector<OutputTracklet>& tracklets) {
  struct Row {
    int frame;
    long id;
    const TrackEntry* e;
    int class_id;
  };
  std::vector<Row> rows;
  for (const OutputTracklet& t : tracklets) {
    for (const TrackEntry& e : t.entries) {
      rows.push_back({e.frame, t.id, &e, t.class_id});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.id < b.id;
  });
  std::string out;
  char buf[256];
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%d,-1,-1\n",
                  r.frame, r.id, r.e->box.x1, r.e->box.y1, r.e->box.width(),
                  r.e->box.height(), r.e->score, r.class_id);
    out += buf;
  }
  return out;
}

void write_results(const std::vector<OutputTracklet>& tracklets,
                   const std::string& path) {
  write_text_atomic(path, format_results(tracklets));
}

EmbeddingTable read_embeddings_csv(const std::string& path,
                                   std::map<int, std::vector<Detection>>& dets) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw format_error(path + ": missing embedding header");
  }
  const auto header = split_csv(strip(line));
  if (header.size() != 3 || header[0] != "frame" || header[1] != "det_index" ||
      header[2].rfind("dim=", 0) != 0) {
    throw format_error(path + ": expected header frame,det_index,dim=D");
  }
  EmbeddingTable table;
  table.dim = static_cast<int>(parse_int(header[2].substr(4), path, 1));
  if (table.dim <= 0) throw format_error(path + ": invalid embedding dim");

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty()) continue;
    const auto f = split_csv(t);
    if (f.size() != static_cast<size_t>(table.dim) + 2) {
      throw format_error(path + ":" + std::to_string(line_no) +
                         ": expected " + std::to_string(table.dim + 2) + " fields");
    }
    const int frame = static_cast<int>(parse_int(f[0], path, line_no));
    const int det_index = static_cast<int>(parse_int(f[1], path, line_no));
    std::vector<double> values(static_cast<size_t>(table.dim));
    for (int i = 0; i < table.dim; ++i) {
      values[static_cast<size_t>(i)] = parse_real(f[static_cast<size_t>(i) + 2], path, line_no);
    }
    Detection* target = nullptr;
    auto fit = dets.find(frame);
    if (fit != dets.end()) {
      for (Detection& d : fit->second) {
        if (d.det_index == det_index) {
          target = &d;
          break;
        }
      }
    }
    if (target == nullptr) {
      std::cerr << "warning: " << path << ":" << line_no
                << ": embedding row has no matching detection, ignored\n";
      continue;
    }
    target->embedding_id = static_cast<int>(table.entries.size());
    table.entries.emplace_back(std::move(values));
  }
  return table;
}

void write_embeddings_csv(const EmbeddingTable& table,
                          const std::map<int, std::vector<Detection>>& dets,
                          const std::string& path) {
  std::string content = "frame,det_index,dim=" + std::to_string(table.dim) + "\n";
  char buf[64];
  for (const auto& [frame, frame_dets] : dets) {
    for (const Detection& d : frame_dets) {
      if (!d.embedding_id) continue;
      const Embedding* e = table.get(*d.embedding_id);
      if (e == nullptr) continue;
      content += std::to_string(frame) + "," + std::to_string(d.det_index);
      for (double v : e->values()) {
        std::snprintf(buf, sizeof(buf), ",%.9f", v);
        content += buf;
      }
      content += "\n";
    }
  }
  write_text_atomic(path, content);
}

SeqInfo read_seqinfo(const std::string& path) {
  std::ifstream in = open_input(path);
  SeqInfo info;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw format_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = strip(t.substr(0, eq));
    const std::string value = strip(t.substr(eq + 1));
    if (key == "width") info.width = static_cast<int>(parse_int(value, path, line_no));
    else if (key == "height") info.height = static_cast<int>(parse_int(value, path, line_no));
    else if (key == "frames") info.frames = static_cast<int>(parse_int(value, path, line_no));
    // unrelated keys tolerated
  }
  if (info.width <= 0 || info.height <= 0 || info.frames <= 0) {
    throw format_error(path + ": seqinfo requires positive width, height, frames");
  }
  return info;
}

void write_seqinfo(const SeqInfo& info, const std::string& path) {
  std::ostringstream os;
  os << "width=" << info.width << "\nheight=" << info.height << "\nframes="
     << info.frames << "\n";
  write_text_atomic(path, os.str());
}

namespace {

bool parse_bool(const std::string& v, const std::string& path, int line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw format_error(path + ":" + std::to_string(line_no) + ": expected boolean, got '" + v + "'");
}

}  // namespace

TrackerConfig read_config(const std::string& path) {
  std::ifstream in = open_input(path);
  TrackerConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw format_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = strip(t.substr(0, eq));
    const std::string value = strip(t.substr(eq + 1));
    if (key == "sigma_iou1") cfg.sigma_iou1 = parse_real(value, path, line_no);
    else if (key == "sigma_iou2") cfg.sigma_iou2 = parse_real(value, path, line_no);
    else if (key == "sigma_app") {
      cfg.sigma_app = (value == "inf" || value == "infinity")
                          ? std::numeric_limits<double>::infinity()
                          : parse_real(value, path, line_no);
    } else if (key == "sigma_h") cfg.sigma_h = parse_real(value, path, line_no);
    else if (key == "t_min") cfg.t_min = static_cast<int>(parse_int(value, path, line_no));
    else if (key == "t_max") cfg.t_max = static_cast<int>(parse_int(value, path, line_no));
    else if (key == "sigma_nms") cfg.sigma_nms = parse_real(value, path, line_no);
    else if (key == "motion_mode") {
      if (value == "none") cfg.motion_policy.mode = MotionMode::none;
      else if (value == "flow") cfg.motion_policy.mode = MotionMode::always_flow;
      else if (value == "flow-fast") cfg.motion_policy.mode = MotionMode::flow_on_trigger;
      else throw format_error(path + ":" + std::to_string(line_no) +
                              ": motion_mode must be none|flow|flow-fast");
    } else if (key == "trigger_ratio") {
      cfg.motion_policy.trigger_ratio = parse_real(value, path, line_no);
    } else if (key == "trigger_counts") {
      if (value == "tracks") cfg.motion_policy.trigger_counts = TriggerCounts::tracks;
      else if (value == "detections") cfg.motion_policy.trigger_counts = TriggerCounts::detections;
      else throw format_error(path + ":" + std::to_string(line_no) +
                              ": trigger_counts must be tracks|detections");
    } else if (key == "association") {
      if (value == "greedy") cfg.association = AssociationMode::greedy;
      else if (value == "hungarian") cfg.association = AssociationMode::hungarian;
      else throw format_error(path + ":" + std::to_string(line_no) +
                              ": association must be greedy|hungarian");
    } else if (key == "class_agnostic") {
      cfg.class_agnostic = parse_bool(value, path, line_no);
    } else if (key == "stage2_cost") {
      if (value == "appearance") cfg.stage2_cost = Stage2Cost::appearance;
      else if (value == "iou") cfg.stage2_cost = Stage2Cost::iou;
      else if (value == "mean") cfg.stage2_cost = Stage2Cost::mean;
      else throw format_error(path + ":" + std::to_string(line_no) +
                              ": stage2_cost must be appearance|iou|mean");
    } else if (key == "ema_alpha") {
      cfg.ema_alpha = parse_real(value, path, line_no);
    } else {
      throw format_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace flowtrack
