#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twr/types.hpp"

namespace twr {

/// Stepped-frequency sweep parameters plus the MIMO array geometry.
struct SweepConfig {
  double f_start_hz = 40.0e6;
  double delta_f_hz = 5.0e6;
  Index n_freq = 873;
  double prf_hz = 113.0;
  double modulation_period_s = 0.0;  // 0 selects 1 / (prf * n_freq)
  std::vector<Eigen::Vector3d> tx_positions;
  std::vector<Eigen::Vector3d> rx_positions;

  /// Default sweep: 40 MHz start, 5 MHz step, 873 bins, PRF 113 Hz,
  /// six-element horizontal line array (outer two transmit, inner four receive).
  static SweepConfig standard();

  /// Single colocated tx/rx pair at the origin of the antenna plane.
  static SweepConfig monostatic();

  Index channel_count() const {
    return static_cast<Index>(tx_positions.size() * rx_positions.size());
  }
  /// Channel index c maps to (tx = c / n_rx, rx = c % n_rx).
  std::pair<Index, Index> channel_pair(Index channel) const;

  double frequency_hz(Index bin) const { return f_start_hz + static_cast<double>(bin) * delta_f_hz; }
  double bandwidth_hz() const { return static_cast<double>(n_freq) * delta_f_hz; }
  double center_frequency_hz() const {
    return f_start_hz + 0.5 * static_cast<double>(n_freq - 1) * delta_f_hz;
  }
  /// Nominal range resolution c / (2 N delta_f).
  double range_resolution_m() const { return kSpeedOfLight / (2.0 * bandwidth_hz()); }

  void validate() const;
};

/// One point reflector with a per-sample position track.
struct Scatterer {
  std::complex<double> reflectivity{1.0, 0.0};
  Eigen::Matrix3Xd trajectory;  // 3 x n_slow positions, metres

  static Scatterer fixed(std::complex<double> reflectivity, const Eigen::Vector3d& position,
                         Index n_slow);
};

/// Homogeneous slab: flat two-way loss plus the excess two-way delay
/// 2 d (sqrt(eps_r) - 1) / c of propagation through the layer.
struct WallModel {
  double thickness_m = 0.30;
  double relative_permittivity = 6.0;
  double two_way_loss_db = 6.0;

  double excess_delay_s() const;
  void validate() const;
};

struct MotionScene {
  std::vector<Scatterer> scatterers;
  std::optional<WallModel> wall;
  double snr_db = std::numeric_limits<double>::infinity();
  Index n_slow = 0;
  std::uint64_t rng_seed = 0;
  // slow multiplicative ripple of the receive chain, common to every return
  double gain_ripple_depth = 0.0;
  double gain_ripple_hz = 0.0;
  double gain_ripple_phase_rad = 0.0;

  void validate() const;
};

/// Complex frequency-domain returns of one channel: n_freq rows x n_slow columns.
struct FrequencyFrame {
  MatrixXcd data;
  SweepConfig sweep;
  Index channel_index = 0;
};

enum class MotionTemplate {
  static_point,
  forward_walk,
  backward_walk,
  forward_crawl,
  backward_crawl,
  forward_fall,
  backward_fall,
  sit_down,
  stand_up,
  pick_up,
  march_in_place,
  boxing,
};

MotionTemplate motion_template_from_string(const std::string& name);
std::string to_string(MotionTemplate t);
/// True for templates whose torso translates in range (the LRSM group).
bool is_translational(MotionTemplate t);

/// Knobs consumed by make_trajectory. Fields are read per template: speed by
/// the walking/crawling group, drop and duration by the vertical group,
/// osc_* by the oscillatory superposition, sway by the seeded micro-motion.
struct MotionParams {
  Eigen::Vector3d start{0.0, 4.0, 1.0};
  double speed_mps = 1.0;
  double duration_s = 0.0;  // active-motion time; 0 means the whole window
  double drop_m = 0.45;
  double osc_amplitude_m = 0.0;
  double osc_rate_hz = 2.0;
  double osc_phase_rad = 0.0;
  double sway_m = 0.0;

  void validate() const;
};

/// Position track of a single scatterer following the named template.
/// Forward motion is toward the array (-y); the vertical axis is z.
Eigen::Matrix3Xd make_trajectory(MotionTemplate t, const MotionParams& params, Index n_slow,
                                 double prf_hz, std::uint64_t seed);

/// Frequency response of the slab at frequency f. Identity when wall is absent.
std::complex<double> wall_factor(const WallModel& wall, double frequency_hz);
std::complex<double> wall_factor(const std::optional<WallModel>& wall, double frequency_hz);

/// Synthesizes the sampled baseband returns of one (tx, rx) channel:
/// entry (n, t) = wall_factor(f_n) * sum_d a_d exp(-j 2 pi f_n tau_d(t)),
/// tau_d(t) = (|p_tx - p_d(t)| + |p_d(t) - p_rx|) / c, plus circular complex
/// Gaussian noise at scene.snr_db relative to mean signal power.
FrequencyFrame synthesize(const MotionScene& scene, const SweepConfig& sweep, Index channel_index);

/// Scene recipe: a human surrogate (torso plus limb scatterers around it)
/// in front of optional wall and static-clutter returns.
struct SceneOptions {
  MotionTemplate motion = MotionTemplate::forward_walk;
  MotionParams torso;
  double torso_reflectivity = 1.0;
  int limb_count = 4;
  double limb_reflectivity = 0.35;
  double limb_amplitude_m = 0.18;
  double limb_rate_hz = 2.0;
  std::optional<WallModel> wall;
  double wall_range_m = 0.5;  // range of the wall-face return
  int clutter_count = 0;      // static in-room reflectors (wall face included)
  double clutter_to_signal_db = 30.0;
  double gain_ripple_depth = 0.0;
  double gain_ripple_hz = 0.25;
  double gain_ripple_phase_rad = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();
  Index n_slow = 226;
  double prf_hz = 113.0;
  std::uint64_t seed = 0;
};

/// Builds the multi-scatterer scene for one motion sample. Limb tracks reuse
/// the torso template with per-limb oscillation; clutter amplitudes are scaled
/// so total static power sits clutter_to_signal_db above total moving power.
MotionScene build_motion_scene(const SceneOptions& options);

}  // namespace twr
