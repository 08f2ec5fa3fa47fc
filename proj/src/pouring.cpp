#include "tcn/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tcn {
namespace {

struct Knot {
  double t;
  double v;
};

double interpolate(const std::vector<Knot>& knots, double t) {
  if (t <= knots.front().t) return knots.front().v;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].t) {
      const double span = knots[i].t - knots[i - 1].t;
      if (span <= 0.0) return knots[i].v;
      const double a = (t - knots[i - 1].t) / span;
      return (1.0 - a) * knots[i - 1].v + a * knots[i].v;
    }
  }
  return knots.back().v;
}

}  // namespace

int nearest_container_angle(double angle_deg) {
  int best = kContainerAngles[0];
  for (int a : kContainerAngles) {
    if (std::abs(angle_deg - a) < std::abs(angle_deg - best)) best = a;
  }
  return best;
}

Vector encode_pouring_latent(const PouringState& s) {
  Vector z(kPouringLatentDim);
  z << s.hand_gap, s.contact ? 1.0 : 0.0, s.distance, s.angle_deg / 90.0, s.flow, s.fill,
      s.subject[0], s.subject[1], s.container[0], s.container[1];
  return z;
}

PouringScript sample_pouring_script(SeededRng& rng, double duration,
                                    const PouringScriptPriors& priors) {
  if (!(duration >= kMinPouringDuration)) {
    std::ostringstream os;
    os << "sample_pouring_script: duration " << duration << " s is below the minimum "
       << kMinPouringDuration << " s";
    throw std::invalid_argument(os.str());
  }
  auto draw = [&rng](const std::array<double, 2>& r) { return rng.uniform(r[0], r[1]); };
  PouringScript s;
  s.duration = duration;
  double f = draw(priors.contact_start);
  s.contact_start = f * duration;
  f += draw(priors.reach);
  s.near = f * duration;
  f += draw(priors.tilt);
  s.flow_start = f * duration;
  f += draw(priors.pour);
  s.flow_end = f * duration;
  f += draw(priors.untilt);
  s.far = f * duration;
  f += draw(priors.release);
  s.contact_end = f * duration;
  return s;
}

PouringState scripted_pouring_state(const PouringScript& s, double t, double threshold) {
  PouringState st;
  if (t < s.contact_start) {
    st.hand_gap = 1.0 - t / s.contact_start;
  } else if (t <= s.contact_end) {
    st.hand_gap = 0.0;
  } else {
    st.hand_gap = std::min(1.0, (t - s.contact_end) / std::max(1e-9, s.duration - s.contact_end));
  }
  st.contact = t >= s.contact_start && t <= s.contact_end;
  st.distance = interpolate({{s.contact_start, 1.0},
                             {s.near, threshold},
                             {s.flow_start, 0.2},
                             {s.flow_end, 0.2},
                             {s.far, threshold},
                             {s.contact_end, 1.0}},
                            t);
  st.angle_deg = interpolate({{s.near, 90.0}, {s.flow_start, 60.0}, {s.flow_end, -45.0}, {s.far, 90.0}}, t);
  st.flow = (t >= s.flow_start && t <= s.flow_end) ? 1.0 : 0.0;
  if (t < s.flow_start) {
    st.fill = 0.0;
  } else if (t <= s.flow_end) {
    st.fill = (t - s.flow_start) / (s.flow_end - s.flow_start);
  } else {
    st.fill = 1.0;
  }
  return st;
}

PouringWorld::PouringWorld(PouringConfig config) : config_(std::move(config)) {
  if (config_.view_angles_deg.empty()) throw std::invalid_argument("PouringWorld: no views");
  if (config_.camera_motion.size() != config_.view_angles_deg.size()) {
    throw std::invalid_argument("PouringWorld: camera_motion needs one entry per view");
  }
  if (config_.frame_rate <= 0.0) throw std::invalid_argument("PouringWorld: frame rate must be positive");
  SeededRng rng(config_.renderer_seed);
  const auto family = RendererFamily::random(kPouringLatentDim + config_.camera_dims,
                                             config_.renderer_hidden, config_.observation_dim, rng);
  for (std::size_t v = 0; v < config_.view_angles_deg.size(); ++v) {
    renderers_.emplace_back(family, static_cast<int>(v), config_.view_angles_deg[v], config_.noise_scale);
  }
}

std::map<std::string, int> PouringWorld::attributes(const PouringState& s) const {
  return {{"hand_contact", s.contact ? 1 : 0},
          {"within_pouring_distance", s.distance < config_.within_distance_threshold ? 1 : 0},
          {"container_angle", nearest_container_angle(s.angle_deg)},
          {"liquid_flowing", s.flow > 0.5 ? 1 : 0},
          {"recipient_has_liquid", (s.fill > 1e-3 || s.flow > 0.5) ? 1 : 0}};
}

Matrix PouringWorld::render_states(const std::vector<PouringState>& states, int view,
                                   const Matrix& camera, SeededRng* noise) const {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (camera.rows() != config_.camera_dims || camera.cols() != n) {
    throw DimensionError("PouringWorld::render_states: camera trajectory shape mismatch");
  }
  Matrix inputs(kPouringLatentDim + config_.camera_dims, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    inputs.col(k) << encode_pouring_latent(states[static_cast<std::size_t>(k)]), camera.col(k);
  }
  return renderer(view).render_sequence(inputs, noise);
}

GeneratedSequence PouringWorld::generate(SeededRng& rng, const std::string& id, double duration,
                                         bool disable_noise) const {
  const PouringScript script = sample_pouring_script(rng, duration);
  const int n = frame_count(duration, config_.frame_rate);
  const Vector times = frame_times(n, config_.frame_rate);

  const Matrix subject = band_limited_trajectory(rng, 2, times, 0.5, config_.subject_motion);
  const std::array<double, 2> container{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

  std::vector<PouringState> states(static_cast<std::size_t>(n));
  Matrix latent(kPouringLatentDim, n);
  AttributeLabelSet labels;
  for (const char* name : kPouringAttributes) labels[name].resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    PouringState s = scripted_pouring_state(script, times[k], config_.within_distance_threshold);
    s.subject = {subject(0, k), subject(1, k)};
    s.container = container;
    for (const auto& [name, value] : attributes(s)) labels[name][static_cast<std::size_t>(k)] = value;
    latent.col(k) = encode_pouring_latent(s);
    states[static_cast<std::size_t>(k)] = s;
  }

  std::vector<Matrix> views;
  for (int v = 0; v < num_views(); ++v) {
    const double amp = config_.camera_motion[static_cast<std::size_t>(v)];
    Matrix camera = band_limited_trajectory(rng, config_.camera_dims, times,
                                            config_.camera_bandwidth_hz, amp);
    for (int d = 0; d < config_.camera_dims; ++d) camera.row(d).array() += 0.5 * amp * rng.uniform(-1.0, 1.0);
    views.push_back(render_states(states, v, camera, disable_noise ? nullptr : &rng));
  }

  const auto& contact = labels["hand_contact"];
  const auto& flowing = labels["liquid_flowing"];
  auto first = [](const std::vector<int>& v) {
    auto it = std::find(v.begin(), v.end(), 1);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  };
  auto last = [](const std::vector<int>& v) {
    auto it = std::find(v.rbegin(), v.rend(), 1);
    return it == v.rend() ? -1 : static_cast<int>(v.rend() - it - 1);
  };
  KeyframeAlignment keys{first(contact), first(flowing), last(flowing), last(contact)};
  validate_keyframes(keys, n);

  GeneratedSequence out{MultiViewSequence(id, config_.frame_rate, std::move(views)), {}};
  out.sidecar.sequence_id = id;
  out.sidecar.latent = std::move(latent);
  out.sidecar.keyframes = keys;
  out.sidecar.attributes = std::move(labels);
  return out;
}

}  // namespace tcn
