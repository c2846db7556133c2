#include "twr/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "twr/rng.hpp"

namespace twr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

SweepConfig SweepConfig::standard() {
  SweepConfig cfg;
  const double z = 1.0;
  cfg.tx_positions = {{-1.0, 0.0, z}, {1.0, 0.0, z}};
  cfg.rx_positions = {{-0.6, 0.0, z}, {-0.2, 0.0, z}, {0.2, 0.0, z}, {0.6, 0.0, z}};
  return cfg;
}

SweepConfig SweepConfig::monostatic() {
  SweepConfig cfg;
  cfg.tx_positions = {{0.0, 0.0, 1.0}};
  cfg.rx_positions = {{0.0, 0.0, 1.0}};
  return cfg;
}

std::pair<Index, Index> SweepConfig::channel_pair(Index channel) const {
  detail::require(channel >= 0 && channel < channel_count(), "channel index out of range");
  const Index n_rx = static_cast<Index>(rx_positions.size());
  return {channel / n_rx, channel % n_rx};
}

void SweepConfig::validate() const {
  detail::require(delta_f_hz > 0.0, "delta_f_hz must be positive");
  detail::require(n_freq >= 2, "n_freq must be at least 2");
  detail::require(prf_hz > 0.0, "prf_hz must be positive");
  detail::require(f_start_hz > 0.0, "f_start_hz must be positive");
  detail::require(!tx_positions.empty() && !rx_positions.empty(),
                  "at least one tx and one rx position required");
  detail::require(modulation_period_s >= 0.0, "modulation_period_s must be nonnegative");
}

Scatterer Scatterer::fixed(std::complex<double> reflectivity, const Eigen::Vector3d& position,
                           Index n_slow) {
  Scatterer s;
  s.reflectivity = reflectivity;
  s.trajectory = position.replicate(1, n_slow);
  return s;
}

double WallModel::excess_delay_s() const {
  return 2.0 * thickness_m * (std::sqrt(relative_permittivity) - 1.0) / kSpeedOfLight;
}

void WallModel::validate() const {
  detail::require(thickness_m >= 0.0, "wall thickness must be nonnegative");
  detail::require(relative_permittivity >= 1.0, "relative permittivity must be >= 1");
  detail::require(two_way_loss_db >= 0.0, "wall loss must be nonnegative");
}

void MotionScene::validate() const {
  detail::require(n_slow >= 1, "n_slow must be at least 1");
  for (const auto& s : scatterers) {
    detail::require(s.trajectory.cols() == n_slow, "trajectory length must equal n_slow");
    detail::require(s.trajectory.allFinite(), "trajectory must be finite");
    detail::require(std::isfinite(s.reflectivity.real()) && std::isfinite(s.reflectivity.imag()),
                    "reflectivity must be finite");
  }
  detail::require(gain_ripple_depth >= 0.0 && gain_ripple_depth < 1.0,
                  "gain ripple depth must lie in [0, 1)");
  detail::require(gain_ripple_hz >= 0.0, "gain ripple rate must be nonnegative");
  if (wall) wall->validate();
}

MotionTemplate motion_template_from_string(const std::string& name) {
  if (name == "static") return MotionTemplate::static_point;
  if (name == "forward_walk") return MotionTemplate::forward_walk;
  if (name == "backward_walk") return MotionTemplate::backward_walk;
  if (name == "forward_crawl") return MotionTemplate::forward_crawl;
  if (name == "backward_crawl") return MotionTemplate::backward_crawl;
  if (name == "forward_fall") return MotionTemplate::forward_fall;
  if (name == "backward_fall") return MotionTemplate::backward_fall;
  if (name == "sit_down") return MotionTemplate::sit_down;
  if (name == "stand_up") return MotionTemplate::stand_up;
  if (name == "pick_up") return MotionTemplate::pick_up;
  if (name == "march_in_place") return MotionTemplate::march_in_place;
  if (name == "boxing") return MotionTemplate::boxing;
  throw std::invalid_argument("unknown motion template: " + name);
}

std::string to_string(MotionTemplate t) {
  switch (t) {
    case MotionTemplate::static_point: return "static";
    case MotionTemplate::forward_walk: return "forward_walk";
    case MotionTemplate::backward_walk: return "backward_walk";
    case MotionTemplate::forward_crawl: return "forward_crawl";
    case MotionTemplate::backward_crawl: return "backward_crawl";
    case MotionTemplate::forward_fall: return "forward_fall";
    case MotionTemplate::backward_fall: return "backward_fall";
    case MotionTemplate::sit_down: return "sit_down";
    case MotionTemplate::stand_up: return "stand_up";
    case MotionTemplate::pick_up: return "pick_up";
    case MotionTemplate::march_in_place: return "march_in_place";
    case MotionTemplate::boxing: return "boxing";
  }
  throw std::invalid_argument("unknown motion template value");
}

bool is_translational(MotionTemplate t) {
  switch (t) {
    case MotionTemplate::forward_walk:
    case MotionTemplate::backward_walk:
    case MotionTemplate::forward_crawl:
    case MotionTemplate::backward_crawl:
    case MotionTemplate::forward_fall:
    case MotionTemplate::backward_fall:
      return true;
    default:
      return false;
  }
}

void MotionParams::validate() const {
  detail::require(start.allFinite(), "start position must be finite");
  for (double v : {speed_mps, duration_s, drop_m, osc_amplitude_m, osc_rate_hz, osc_phase_rad,
                   sway_m}) {
    detail::require(std::isfinite(v), "motion parameter must be finite");
  }
  detail::require(duration_s >= 0.0, "duration must be nonnegative");
  detail::require(osc_amplitude_m >= 0.0 && sway_m >= 0.0, "amplitudes must be nonnegative");
}

Eigen::Matrix3Xd make_trajectory(MotionTemplate t, const MotionParams& params, Index n_slow,
                                 double prf_hz, std::uint64_t seed) {
  detail::require(n_slow >= 1, "n_slow must be at least 1");
  detail::require(prf_hz > 0.0, "prf must be positive");
  params.validate();

  const double window_s = static_cast<double>(n_slow) / prf_hz;
  const double active_s = params.duration_s > 0.0 ? params.duration_s : window_s;

  Eigen::Matrix3Xd track(3, n_slow);
  for (Index k = 0; k < n_slow; ++k) {
    const double time = static_cast<double>(k) / prf_hz;
    const double u = active_s > 0.0 ? std::min(time / active_s, 1.0) : 1.0;
    Eigen::Vector3d p = params.start;

    switch (t) {
      case MotionTemplate::static_point:
        break;
      case MotionTemplate::forward_walk:
      case MotionTemplate::forward_crawl:
        p.y() -= params.speed_mps * std::min(time, active_s);
        break;
      case MotionTemplate::backward_walk:
      case MotionTemplate::backward_crawl:
        p.y() += params.speed_mps * std::min(time, active_s);
        break;
      case MotionTemplate::forward_fall:
        p.y() -= params.speed_mps * active_s * smoothstep(u);
        p.z() -= params.drop_m * smoothstep(u);
        break;
      case MotionTemplate::backward_fall:
        p.y() += params.speed_mps * active_s * smoothstep(u);
        p.z() -= params.drop_m * smoothstep(u);
        break;
      case MotionTemplate::sit_down:
        p.y() += params.speed_mps * active_s * smoothstep(u);
        p.z() -= params.drop_m * smoothstep(u);
        break;
      case MotionTemplate::stand_up:
        p.y() -= params.speed_mps * active_s * smoothstep(u);
        p.z() += params.drop_m * smoothstep(u);
        break;
      case MotionTemplate::pick_up: {
        const double dip = std::sin(std::numbers::pi * u);
        p.z() -= params.drop_m * dip * dip;
        break;
      }
      case MotionTemplate::march_in_place:
      case MotionTemplate::boxing:
        break;
    }

    if (params.osc_amplitude_m > 0.0) {
      const double theta = kTwoPi * params.osc_rate_hz * time + params.osc_phase_rad;
      double waveform = std::sin(theta);
      if (t == MotionTemplate::boxing) waveform = 0.75 * std::sin(theta) + 0.35 * std::sin(2.0 * theta);
      p.y() -= params.osc_amplitude_m * waveform;
    }

    track.col(k) = p;
  }

  if (params.sway_m > 0.0) {
    RandomStream rng(mix_seed(seed, 0x574159));
    for (int component = 0; component < 3; ++component) {
      const double rate = rng.uniform(0.15, 0.6);
      const double phase = rng.uniform(0.0, kTwoPi);
      const double amp = params.sway_m * rng.uniform(0.5, 1.0);
      const int axis = component == 2 ? 0 : 1;  // sway mostly in range, some cross-range
      for (Index k = 0; k < n_slow; ++k) {
        const double time = static_cast<double>(k) / prf_hz;
        track(axis, k) += amp * std::sin(kTwoPi * rate * time + phase) / 3.0;
      }
    }
  }
  return track;
}

std::complex<double> wall_factor(const WallModel& wall, double frequency_hz) {
  detail::require(frequency_hz > 0.0, "frequency must be positive");
  const double amplitude = std::pow(10.0, -wall.two_way_loss_db / 20.0);
  return std::polar(amplitude, -kTwoPi * frequency_hz * wall.excess_delay_s());
}

std::complex<double> wall_factor(const std::optional<WallModel>& wall, double frequency_hz) {
  if (!wall) return {1.0, 0.0};
  return wall_factor(*wall, frequency_hz);
}

FrequencyFrame synthesize(const MotionScene& scene, const SweepConfig& sweep, Index channel_index) {
  sweep.validate();
  scene.validate();
  const auto [tx, rx] = sweep.channel_pair(channel_index);
  const Eigen::Vector3d p_tx = sweep.tx_positions[static_cast<std::size_t>(tx)];
  const Eigen::Vector3d p_rx = sweep.rx_positions[static_cast<std::size_t>(rx)];

  FrequencyFrame frame;
  frame.sweep = sweep;
  frame.channel_index = channel_index;
  frame.data = MatrixXcd::Zero(sweep.n_freq, scene.n_slow);

  for (const auto& scatterer : scene.scatterers) {
    for (Index t = 0; t < scene.n_slow; ++t) {
      const Eigen::Vector3d p = scatterer.trajectory.col(t);
      const double delay = ((p_tx - p).norm() + (p - p_rx).norm()) / kSpeedOfLight;
      for (Index n = 0; n < sweep.n_freq; ++n) {
        frame.data(n, t) +=
            scatterer.reflectivity * std::polar(1.0, -kTwoPi * sweep.frequency_hz(n) * delay);
      }
    }
  }

  if (scene.wall) {
    for (Index n = 0; n < sweep.n_freq; ++n) {
      frame.data.row(n) *= wall_factor(*scene.wall, sweep.frequency_hz(n));
    }
  }

  if (scene.gain_ripple_depth > 0.0) {
    for (Index t = 0; t < scene.n_slow; ++t) {
      const double g = 1.0 + scene.gain_ripple_depth *
                                 std::sin(kTwoPi * scene.gain_ripple_hz * static_cast<double>(t) /
                                              sweep.prf_hz +
                                          scene.gain_ripple_phase_rad);
      frame.data.col(t) *= g;
    }
  }

  if (std::isfinite(scene.snr_db)) {
    const double signal_power =
        frame.data.squaredNorm() / static_cast<double>(frame.data.size());
    if (signal_power > 0.0) {
      const double noise_power = signal_power * std::pow(10.0, -scene.snr_db / 10.0);
      const double sigma = std::sqrt(noise_power / 2.0);
      RandomStream rng(mix_seed(scene.rng_seed, 0x4e4f495345ULL, static_cast<std::uint64_t>(channel_index)));
      for (Index t = 0; t < scene.n_slow; ++t) {
        for (Index n = 0; n < sweep.n_freq; ++n) {
          frame.data(n, t) += std::complex<double>(sigma * rng.gaussian(), sigma * rng.gaussian());
        }
      }
    }
  }
  return frame;
}

MotionScene build_motion_scene(const SceneOptions& options) {
  detail::require(options.n_slow >= 1, "n_slow must be at least 1");
  detail::require(options.limb_count >= 0 && options.limb_count <= 8, "limb_count in [0, 8]");
  detail::require(options.clutter_count >= 0, "clutter_count must be nonnegative");

  MotionScene scene;
  scene.n_slow = options.n_slow;
  scene.snr_db = options.snr_db;
  scene.rng_seed = options.seed;
  scene.wall = options.wall;
  scene.gain_ripple_depth = options.gain_ripple_depth;
  scene.gain_ripple_hz = options.gain_ripple_hz;
  scene.gain_ripple_phase_rad = options.gain_ripple_phase_rad;

  RandomStream rng(mix_seed(options.seed, 0x5343454e45ULL));
  detail::require(options.prf_hz > 0.0, "prf must be positive");

  double moving_power = 0.0;

  const bool is_static_subject = options.motion == MotionTemplate::static_point;
  {
    Scatterer torso;
    torso.reflectivity = options.torso_reflectivity;
    torso.trajectory = make_trajectory(options.motion, options.torso, options.n_slow,
                                       options.prf_hz, mix_seed(options.seed, 1));
    scene.scatterers.push_back(std::move(torso));
    if (!is_static_subject) moving_power += std::norm(options.torso_reflectivity);
  }

  for (int limb = 0; limb < options.limb_count; ++limb) {
    MotionParams p = options.torso;
    // Limbs ride the torso path with their own radial oscillation; alternate
    // phases emulate opposing arm/leg swings, lower z for legs.
    p.osc_amplitude_m = options.limb_amplitude_m * (0.8 + 0.1 * limb);
    p.osc_rate_hz = options.limb_rate_hz * (limb < 2 ? 1.0 : 0.5);
    p.osc_phase_rad = limb % 2 == 0 ? 0.0 : std::numbers::pi;
    p.start.z() = options.torso.start.z() + (limb < 2 ? 0.2 : -0.5);
    p.start.x() = options.torso.start.x() + (limb % 2 == 0 ? 0.2 : -0.2);
    Scatterer s;
    s.reflectivity = options.limb_reflectivity;
    s.trajectory = make_trajectory(options.motion, p, options.n_slow, options.prf_hz,
                                   mix_seed(options.seed, 2 + static_cast<std::uint64_t>(limb)));
    scene.scatterers.push_back(std::move(s));
    if (!is_static_subject) moving_power += std::norm(options.limb_reflectivity);
  }

  int static_count = options.clutter_count + (options.wall ? 1 : 0);
  if (static_count > 0) {
    const double reference = moving_power > 0.0 ? moving_power : 1.0;
    const double total_static =
        reference * std::pow(10.0, options.clutter_to_signal_db / 10.0);
    const double per_scatterer = std::sqrt(total_static / static_cast<double>(static_count));
    if (options.wall) {
      scene.scatterers.push_back(Scatterer::fixed(
          per_scatterer, {0.0, options.wall_range_m, 1.0}, options.n_slow));
    }
    for (int i = 0; i < options.clutter_count; ++i) {
      const Eigen::Vector3d position(rng.uniform(-2.0, 2.0), rng.uniform(1.0, 7.0),
                                     rng.uniform(0.2, 1.8));
      scene.scatterers.push_back(Scatterer::fixed(
          std::polar(per_scatterer, rng.uniform(0.0, 2.0 * std::numbers::pi)), position,
          options.n_slow));
    }
  }
  return scene;
}

}  // namespace twr
