#include "locokernel/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace locokernel {

namespace {

double lerp_level(double level0, double level9, int level) {
  if (level <= 0) return level0;
  if (level >= 9) return level9;
  return level0 + (level9 - level0) * (static_cast<double>(level) / 9.0);
}

double hash_uniform(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct FieldBuffer {
  Eigen::Vector2d origin;
  double resolution;
  int rows;
  int cols;
  std::vector<double> heights;
  std::vector<std::uint8_t> voids;

  double cell_x(int c) const { return origin.x() + c * resolution; }
  double cell_y(int r) const { return origin.y() + r * resolution; }
  int idx(int r, int c) const { return r * cols + c; }
};

FieldBuffer make_buffer(const TerrainSpec& spec, const TerrainTuning& tuning) {
  FieldBuffer fb;
  fb.resolution = tuning.resolution;
  fb.cols = std::max(1, static_cast<int>(std::lround(spec.extent.x() / fb.resolution)));
  fb.rows = std::max(1, static_cast<int>(std::lround(spec.extent.y() / fb.resolution)));
  fb.origin = {-0.5 * spec.extent.x() + 0.5 * fb.resolution,
               -0.5 * spec.extent.y() + 0.5 * fb.resolution};
  fb.heights.assign(static_cast<std::size_t>(fb.rows) * fb.cols, 0.0);
  fb.voids.assign(static_cast<std::size_t>(fb.rows) * fb.cols, 0);
  return fb;
}

void gen_rough(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  const double amp = lerp_level(t.rough_amp_level0, t.rough_amp_level9, spec.level);
  const double cell = t.rough_cell;
  auto node = [&](long i, long j) {
    const std::uint64_t h = Rng::mix(spec.seed, static_cast<std::uint64_t>(i + (1L << 20)),
                                     static_cast<std::uint64_t>(j + (1L << 20)));
    return amp * (2.0 * hash_uniform(h) - 1.0);
  };
  for (int r = 0; r < fb.rows; ++r) {
    for (int c = 0; c < fb.cols; ++c) {
      const double u = fb.cell_x(c) / cell;
      const double v = fb.cell_y(r) / cell;
      const long i0 = static_cast<long>(std::floor(u));
      const long j0 = static_cast<long>(std::floor(v));
      const double fu = u - i0;
      const double fv = v - j0;
      const double h00 = node(i0, j0), h10 = node(i0 + 1, j0);
      const double h01 = node(i0, j0 + 1), h11 = node(i0 + 1, j0 + 1);
      fb.heights[fb.idx(r, c)] =
          (1 - fv) * ((1 - fu) * h00 + fu * h10) + fv * ((1 - fu) * h01 + fu * h11);
    }
  }
}

void gen_discrete(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  Rng rng(Rng::mix(spec.seed, 0xD15C ^ static_cast<std::uint64_t>(spec.level)));
  const double max_h = lerp_level(t.discrete_height_level0, t.discrete_height_level9, spec.level);
  for (int b = 0; b < t.discrete_blocks; ++b) {
    const double cx = rng.uniform(-0.5 * spec.extent.x(), 0.5 * spec.extent.x());
    const double cy = rng.uniform(-0.5 * spec.extent.y(), 0.5 * spec.extent.y());
    const double sx = rng.uniform(t.discrete_size_min, t.discrete_size_max);
    const double sy = rng.uniform(t.discrete_size_min, t.discrete_size_max);
    const double h = rng.uniform(-max_h, max_h);
    for (int r = 0; r < fb.rows; ++r) {
      if (std::abs(fb.cell_y(r) - cy) > 0.5 * sy) continue;
      for (int c = 0; c < fb.cols; ++c) {
        if (std::abs(fb.cell_x(c) - cx) > 0.5 * sx) continue;
        fb.heights[fb.idx(r, c)] = h;
      }
    }
  }
}

void gen_stairs(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t, bool up) {
  const double rise = lerp_level(t.stair_rise_level0, t.stair_rise_level9, spec.level);
  const double run = t.stair_run;
  const double pm = spec.platform_margin;
  for (int c = 0; c < fb.cols; ++c) {
    const double ax = std::abs(fb.cell_x(c));
    if (ax <= pm) continue;
    const int step = static_cast<int>(std::floor((ax - pm) / run)) + 1;
    const double h = (up ? rise : -rise) * step;
    for (int r = 0; r < fb.rows; ++r) fb.heights[fb.idx(r, c)] = h;
  }
}

void validate_stone_params(const StoneParams& p) {
  if (p.stone_size < 0 || p.stone_gap < 0 || p.max_shift < 0 || p.max_height < 0)
    throw std::invalid_argument("stone parameters must be nonnegative");
  if (!(p.stone_size > p.stone_gap))
    throw std::invalid_argument("stone_size must exceed stone_gap");
}

// Square stones on a jittered lattice; cells not covered by any stone are
// void. Per-stone jitter and height come from a position-keyed hash so the
// result does not depend on rasterization order.
void gen_stone_lattice(FieldBuffer& fb, std::uint64_t seed, const StoneParams& p,
                       std::uint64_t salt) {
  validate_stone_params(p);
  const double pitch = p.stone_size + p.stone_gap;
  auto stone = [&](long i, long j, Eigen::Vector2d& center, double& height) {
    Rng sr(Rng::mix(seed ^ salt, static_cast<std::uint64_t>(i + (1L << 20)),
                    static_cast<std::uint64_t>(j + (1L << 20))));
    const double sx = sr.uniform(-p.max_shift, p.max_shift);
    const double sy = sr.uniform(-p.max_shift, p.max_shift);
    center = {i * pitch + sx, j * pitch + sy};
    height = sr.uniform(-p.max_height, p.max_height);
  };
  for (int r = 0; r < fb.rows; ++r) {
    for (int c = 0; c < fb.cols; ++c) {
      const double wx = fb.cell_x(c);
      const double wy = fb.cell_y(r);
      const long i0 = static_cast<long>(std::lround(wx / pitch));
      const long j0 = static_cast<long>(std::lround(wy / pitch));
      bool covered = false;
      double best_d2 = 0.0, best_h = 0.0;
      for (long i = i0 - 1; i <= i0 + 1; ++i) {
        for (long j = j0 - 1; j <= j0 + 1; ++j) {
          Eigen::Vector2d ctr;
          double h;
          stone(i, j, ctr, h);
          if (std::abs(wx - ctr.x()) > 0.5 * p.stone_size ||
              std::abs(wy - ctr.y()) > 0.5 * p.stone_size)
            continue;
          const double d2 = (Eigen::Vector2d(wx, wy) - ctr).squaredNorm();
          if (!covered || d2 < best_d2) {
            covered = true;
            best_d2 = d2;
            best_h = h;
          }
        }
      }
      if (covered) {
        fb.heights[fb.idx(r, c)] = best_h;
      } else {
        fb.voids[fb.idx(r, c)] = 1;
      }
    }
  }
}

void gen_beams(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  const double w = lerp_level(t.beam_width_level0, t.beam_width_level9, spec.level);
  const double g = lerp_level(t.beam_gap_level0, t.beam_gap_level9, spec.level);
  const double pitch = w + g;
  for (int r = 0; r < fb.rows; ++r) {
    const double wy = fb.cell_y(r);
    const double nearest = std::lround(wy / pitch) * pitch;
    if (std::abs(wy - nearest) > 0.5 * w) {
      for (int c = 0; c < fb.cols; ++c) fb.voids[fb.idx(r, c)] = 1;
    }
  }
}

void gen_pallets(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  const double gap = lerp_level(t.pallet_gap_level0, t.pallet_gap_level9, spec.level);
  const double max_h = lerp_level(t.pallet_height_level0, t.pallet_height_level9, spec.level);
  const double pitch = t.pallet_size + gap;
  for (int r = 0; r < fb.rows; ++r) {
    for (int c = 0; c < fb.cols; ++c) {
      const double wx = fb.cell_x(c);
      const double wy = fb.cell_y(r);
      const long i = static_cast<long>(std::lround(wx / pitch));
      const long j = static_cast<long>(std::lround(wy / pitch));
      if (std::abs(wx - i * pitch) <= 0.5 * t.pallet_size &&
          std::abs(wy - j * pitch) <= 0.5 * t.pallet_size) {
        const std::uint64_t h = Rng::mix(spec.seed ^ 0xBA11E7, static_cast<std::uint64_t>(i + (1L << 20)),
                                         static_cast<std::uint64_t>(j + (1L << 20)));
        fb.heights[fb.idx(r, c)] = max_h * hash_uniform(h);
      } else {
        fb.voids[fb.idx(r, c)] = 1;
      }
    }
  }
}

void gen_circles(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  const double radius = lerp_level(t.circle_radius_level0, t.circle_radius_level9, spec.level);
  const double gap = lerp_level(t.circle_gap_level0, t.circle_gap_level9, spec.level);
  const double pitch = 2.0 * radius + gap;
  const double row_pitch = pitch * 0.8660254037844386;
  for (int r = 0; r < fb.rows; ++r) {
    for (int c = 0; c < fb.cols; ++c) {
      const double wx = fb.cell_x(c);
      const double wy = fb.cell_y(r);
      const long j0 = static_cast<long>(std::lround(wy / row_pitch));
      bool covered = false;
      for (long j = j0 - 1; j <= j0 + 1 && !covered; ++j) {
        const double off = (j % 2 == 0) ? 0.0 : 0.5 * pitch;
        const long i = static_cast<long>(std::lround((wx - off) / pitch));
        const Eigen::Vector2d ctr(i * pitch + off, j * row_pitch);
        if ((Eigen::Vector2d(wx, wy) - ctr).norm() <= radius) covered = true;
      }
      if (!covered) fb.voids[fb.idx(r, c)] = 1;
    }
  }
}

void gen_pits(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  Rng rng(Rng::mix(spec.seed, 0x9175 ^ static_cast<std::uint64_t>(spec.level)));
  const double size = lerp_level(t.pit_size_level0, t.pit_size_level9, spec.level);
  for (int k = 0; k < t.pit_count; ++k) {
    const double cx = rng.uniform(-0.5 * spec.extent.x(), 0.5 * spec.extent.x());
    const double cy = rng.uniform(-0.5 * spec.extent.y(), 0.5 * spec.extent.y());
    for (int r = 0; r < fb.rows; ++r) {
      if (std::abs(fb.cell_y(r) - cy) > 0.5 * size) continue;
      for (int c = 0; c < fb.cols; ++c) {
        if (std::abs(fb.cell_x(c) - cx) > 0.5 * size) continue;
        fb.voids[fb.idx(r, c)] = 1;
      }
    }
  }
}

void gen_gaps(FieldBuffer& fb, const TerrainSpec& spec, const TerrainTuning& t) {
  const double width = t.gap_width_per_level * (spec.level + 1);
  const double first = spec.platform_margin + 0.75;
  for (int c = 0; c < fb.cols; ++c) {
    const double ax = std::abs(fb.cell_x(c));
    if (ax < first) continue;
    const double k = std::lround((ax - first) / t.gap_spacing);
    const double gap_center = first + k * t.gap_spacing;
    if (std::abs(ax - gap_center) <= 0.5 * width) {
      for (int r = 0; r < fb.rows; ++r) fb.voids[fb.idx(r, c)] = 1;
    }
  }
}

void apply_kind(FieldBuffer& fb, TerrainKind kind, const TerrainSpec& spec,
                const TerrainTuning& tuning) {
  switch (kind) {
    case TerrainKind::smooth:
      break;
    case TerrainKind::rough:
      gen_rough(fb, spec, tuning);
      break;
    case TerrainKind::discrete:
      gen_discrete(fb, spec, tuning);
      break;
    case TerrainKind::stairs_up:
      gen_stairs(fb, spec, tuning, true);
      break;
    case TerrainKind::stairs_down:
      gen_stairs(fb, spec, tuning, false);
      break;
    case TerrainKind::stones:
      gen_stone_lattice(fb, spec.seed, stones_params(spec.level), 0x570E5);
      break;
    case TerrainKind::beams:
      gen_beams(fb, spec, tuning);
      break;
    case TerrainKind::pallets:
      gen_pallets(fb, spec, tuning);
      break;
    case TerrainKind::circles:
      gen_circles(fb, spec, tuning);
      break;
    case TerrainKind::small_stones: {
      StoneParams p;
      p.stone_size = lerp_level(tuning.small_stone_size_level0, tuning.small_stone_size_level9, spec.level);
      p.stone_gap = lerp_level(tuning.small_stone_gap_level0, tuning.small_stone_gap_level9, spec.level);
      p.max_shift = 0.4 * p.stone_gap;
      p.max_height = lerp_level(0.01, tuning.small_stone_height_level9, spec.level);
      gen_stone_lattice(fb, spec.seed, p, 0x5A411);
      break;
    }
    case TerrainKind::pits:
      gen_pits(fb, spec, tuning);
      break;
    case TerrainKind::gaps:
      gen_gaps(fb, spec, tuning);
      break;
    case TerrainKind::combo:
      throw std::invalid_argument("combo terrains cannot nest");
  }
}

void stamp_platform(FieldBuffer& fb, double margin) {
  for (int r = 0; r < fb.rows; ++r) {
    if (std::abs(fb.cell_y(r)) > margin) continue;
    for (int c = 0; c < fb.cols; ++c) {
      if (std::abs(fb.cell_x(c)) > margin) continue;
      fb.heights[fb.idx(r, c)] = 0.0;
      fb.voids[fb.idx(r, c)] = 0;
    }
  }
}

void validate_spec(const TerrainSpec& spec, const TerrainTuning& tuning) {
  if (spec.level < 0 || spec.level > 9) throw std::invalid_argument("terrain level must be in [0, 9]");
  if (tuning.resolution <= 0) throw std::invalid_argument("terrain resolution must be positive");
  if (spec.extent.x() < 2.0 * spec.platform_margin || spec.extent.y() < 2.0 * spec.platform_margin)
    throw std::invalid_argument("terrain extent smaller than twice the platform margin");
  if (spec.kind == TerrainKind::combo &&
      (spec.combo_a == TerrainKind::combo || spec.combo_b == TerrainKind::combo))
    throw std::invalid_argument("combo terrains must combine atomic kinds");
}

}  // namespace

std::string kind_name(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::smooth: return "smooth";
    case TerrainKind::rough: return "rough";
    case TerrainKind::discrete: return "discrete";
    case TerrainKind::stairs_up: return "stairs_up";
    case TerrainKind::stairs_down: return "stairs_down";
    case TerrainKind::stones: return "stones";
    case TerrainKind::beams: return "beams";
    case TerrainKind::pallets: return "pallets";
    case TerrainKind::circles: return "circles";
    case TerrainKind::small_stones: return "small_stones";
    case TerrainKind::pits: return "pits";
    case TerrainKind::gaps: return "gaps";
    case TerrainKind::combo: return "combo";
  }
  return "unknown";
}

TerrainKind parse_kind(const std::string& name) {
  for (const TerrainKind k :
       {TerrainKind::smooth, TerrainKind::rough, TerrainKind::discrete, TerrainKind::stairs_up,
        TerrainKind::stairs_down, TerrainKind::stones, TerrainKind::beams, TerrainKind::pallets,
        TerrainKind::circles, TerrainKind::small_stones, TerrainKind::pits, TerrainKind::gaps}) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown terrain kind: " + name);
}

std::string TerrainSpec::name() const {
  if (kind == TerrainKind::combo) return kind_name(combo_a) + "+" + kind_name(combo_b);
  return kind_name(kind);
}

TerrainSpec parse_terrain_spec_name(const std::string& name) {
  TerrainSpec spec;
  const auto plus = name.find('+');
  if (plus == std::string::npos) {
    spec.kind = parse_kind(name);
  } else {
    spec.kind = TerrainKind::combo;
    spec.combo_a = parse_kind(name.substr(0, plus));
    spec.combo_b = parse_kind(name.substr(plus + 1));
  }
  return spec;
}

StoneParams stones_params(int level) {
  if (level < 0 || level > 9) throw std::invalid_argument("stone level must be in [0, 9]");
  // Published endpoints; levels 1..8 interpolate linearly.
  static constexpr StoneParams kLevel0{0.92, 0.025, 0.0, 0.01};
  static constexpr StoneParams kLevel9{0.40, 0.200, 0.10, 0.10};
  StoneParams p;
  p.stone_size = lerp_level(kLevel0.stone_size, kLevel9.stone_size, level);
  p.stone_gap = lerp_level(kLevel0.stone_gap, kLevel9.stone_gap, level);
  p.max_shift = lerp_level(kLevel0.max_shift, kLevel9.max_shift, level);
  p.max_height = lerp_level(kLevel0.max_height, kLevel9.max_height, level);
  return p;
}

Heightfield::Heightfield(Eigen::Vector2d origin, double resolution, int rows, int cols,
                         std::vector<double> heights, std::vector<std::uint8_t> void_mask)
    : origin_(std::move(origin)),
      resolution_(resolution),
      rows_(rows),
      cols_(cols),
      heights_(std::move(heights)),
      void_mask_(std::move(void_mask)) {
  if (resolution_ <= 0) throw std::invalid_argument("heightfield resolution must be positive");
  if (rows_ < 1 || cols_ < 1) throw std::invalid_argument("heightfield must have at least one cell");
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  if (heights_.size() != n || void_mask_.size() != n)
    throw std::invalid_argument("heightfield buffer sizes do not match rows*cols");
  for (const double h : heights_)
    if (!std::isfinite(h)) throw std::invalid_argument("heightfield heights must be finite");
}

bool Heightfield::in_bounds(double x, double y) const {
  return x >= min_x() && x <= max_x() && y >= min_y() && y <= max_y();
}

std::optional<double> Heightfield::height_at(double x, double y) const {
  if (!in_bounds(x, y))
    throw std::out_of_range("heightfield query outside bounds");
  const int c = std::clamp(static_cast<int>(std::lround((x - origin_.x()) / resolution_)), 0, cols_ - 1);
  const int r = std::clamp(static_cast<int>(std::lround((y - origin_.y()) / resolution_)), 0, rows_ - 1);
  if (is_void(r, c)) return std::nullopt;
  return height(r, c);
}

void Heightfield::save(std::ostream& out) const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", resolution_);
  out << "HF v1 " << rows_ << ' ' << cols_ << ' ' << buf;
  std::snprintf(buf, sizeof(buf), "%.17g", origin_.x());
  out << ' ' << buf;
  std::snprintf(buf, sizeof(buf), "%.17g", origin_.y());
  out << ' ' << buf << '\n';
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      if (c) out << ' ';
      if (is_void(r, c)) {
        out << "void";
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", height(r, c));
        out << buf;
      }
    }
    out << '\n';
  }
}

void Heightfield::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open heightfield file for writing: " + path);
  save(out);
  if (!out) throw std::runtime_error("error writing heightfield file: " + path);
}

Heightfield Heightfield::load(std::istream& in) {
  std::string magic, version;
  int rows = 0, cols = 0;
  double resolution = 0, ox = 0, oy = 0;
  if (!(in >> magic >> version >> rows >> cols >> resolution >> ox >> oy) || magic != "HF" ||
      version != "v1")
    throw std::runtime_error("malformed heightfield header (expected `HF v1 rows cols res ox oy`)");
  if (rows < 1 || cols < 1 || resolution <= 0)
    throw std::runtime_error("heightfield header values out of range");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<double> heights(n, 0.0);
  std::vector<std::uint8_t> voids(n, 0);
  std::string tok;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> tok)) throw std::runtime_error("heightfield truncated at value " + std::to_string(i));
    if (tok == "void") {
      voids[i] = 1;
    } else {
      try {
        heights[i] = std::stod(tok);
      } catch (const std::exception&) {
        throw std::runtime_error("bad heightfield value `" + tok + "` at index " + std::to_string(i));
      }
    }
  }
  return Heightfield({ox, oy}, resolution, rows, cols, std::move(heights), std::move(voids));
}

Heightfield Heightfield::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open heightfield file: " + path);
  return load(in);
}

Heightfield generate_terrain(const TerrainSpec& spec, const TerrainTuning& tuning) {
  validate_spec(spec, tuning);
  FieldBuffer fb = make_buffer(spec, tuning);
  if (spec.kind == TerrainKind::combo) {
    TerrainSpec a = spec;
    a.kind = spec.combo_a;
    a.seed = Rng::mix(spec.seed, 1);
    TerrainSpec b = spec;
    b.kind = spec.combo_b;
    b.seed = Rng::mix(spec.seed, 2);
    FieldBuffer fa = make_buffer(a, tuning);
    FieldBuffer fbuf = make_buffer(b, tuning);
    apply_kind(fa, a.kind, a, tuning);
    apply_kind(fbuf, b.kind, b, tuning);
    // kind_a gives the structure, kind_b's heights perturb its solid tops;
    // void regions accumulate from both.
    for (std::size_t i = 0; i < fb.heights.size(); ++i) {
      fb.heights[i] = fa.heights[i] + fbuf.heights[i];
      fb.voids[i] = (fa.voids[i] || fbuf.voids[i]) ? 1 : 0;
    }
  } else {
    apply_kind(fb, spec.kind, spec, tuning);
  }
  stamp_platform(fb, spec.platform_margin);
  return Heightfield(fb.origin, fb.resolution, fb.rows, fb.cols, std::move(fb.heights),
                     std::move(fb.voids));
}

}  // namespace locokernel
