#include "specmon/sim.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json_reader.hpp"
#include "specmon/error.hpp"

namespace specmon {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based stream: independent uniform draws keyed by (seed, a, b, lane).
double unit_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t lane) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ lane);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double gaussian(std::uint64_t seed, std::uint64_t t_key, std::uint64_t bin) {
  double u1 = unit_uniform(seed, t_key, bin, 0x6e6f697365ull);
  const double u2 = unit_uniform(seed, t_key, bin, 0x6e6f697366ull);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Noise beyond this many sigmas is treated as impossible by the analytic oracle.
constexpr double kNoiseCeilingSigmas = 6.0;

}  // namespace

BandProfile BandProfile::constant(Hz center, Hz bandwidth, double power_dbm, double probability) {
  BandProfile b;
  b.center_hz = center;
  b.bandwidth_hz = bandwidth;
  b.active_power_dbm = power_dbm;
  b.activity.fill(probability);
  return b;
}

void validate_environment(const Environment& env) {
  if (!(env.freq_start_hz < env.freq_stop_hz)) throw InvalidArgument("environment: span start must be < stop");
  if (!(env.rbw_hz > 0.0)) throw InvalidArgument("environment: rbw must be > 0");
  if (env.rbw_hz > static_cast<double>(env.freq_stop_hz - env.freq_start_hz)) {
    throw InvalidArgument("environment: rbw wider than the span");
  }
  if (!(env.noise_sigma_db >= 0.0)) throw InvalidArgument("environment: noise sigma must be >= 0");
  if (!(env.sweep_time_s > 0.0)) throw InvalidArgument("environment: sweep_time must be > 0");
  if (!std::isfinite(env.noise_floor_dbm)) throw InvalidArgument("environment: noise floor must be finite");
  for (std::size_t i = 0; i < env.bands.size(); ++i) {
    const auto& b = env.bands[i];
    const std::string where = "environment: band " + std::to_string(i) + ": ";
    if (b.bandwidth_hz <= 0) throw InvalidArgument(where + "bandwidth must be > 0");
    if (b.low_hz() < env.freq_start_hz || b.high_hz() > env.freq_stop_hz) {
      throw InvalidArgument(where + "band lies outside the span");
    }
    for (double p : b.activity) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(where + "activity probability outside [0,1]");
    }
    if (!std::isfinite(b.active_power_dbm)) throw InvalidArgument(where + "active power must be finite");
  }
}

std::vector<Hz> bin_frequencies(const Environment& env) {
  const double span = static_cast<double>(env.freq_stop_hz - env.freq_start_hz);
  const auto n = static_cast<std::size_t>(std::floor(span / env.rbw_hz + 1e-9));
  std::vector<Hz> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = env.freq_start_hz + static_cast<Hz>(std::llround(env.rbw_hz * (static_cast<double>(i) + 0.5)));
  }
  return f;
}

double activity_probability(const Environment& env, std::size_t band, Timestamp t) {
  const auto& b = env.bands.at(band);
  if (!b.weekdays[static_cast<std::size_t>(env.timezone.local_weekday(t))]) return 0.0;
  return b.activity[static_cast<std::size_t>(env.timezone.local_hour(t))];
}

bool band_active(const Environment& env, std::size_t band, Timestamp t) {
  const double p = activity_probability(env, band, t);
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  const auto key = static_cast<std::uint64_t>(to_unix_us(t));
  return unit_uniform(env.seed, band + 1, key, 0x616374ull) < p;
}

Sweep generate_sweep(const Environment& env, Timestamp t) {
  Sweep s;
  s.site_id = env.site_id;
  s.start_time = t;
  const auto freqs = bin_frequencies(env);
  std::vector<bool> active(env.bands.size());
  for (std::size_t b = 0; b < env.bands.size(); ++b) active[b] = band_active(env, b, t);

  const auto key = static_cast<std::uint64_t>(to_unix_us(t));
  s.bins.reserve(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    double noise = env.noise_floor_dbm;
    if (env.noise_sigma_db > 0.0) noise += env.noise_sigma_db * gaussian(env.seed, key, i);
    double power = noise;
    bool any_band = false;
    double mw = dbm_to_mw(noise);
    for (std::size_t b = 0; b < env.bands.size(); ++b) {
      if (active[b] && env.bands[b].covers(freqs[i])) {
        mw += dbm_to_mw(env.bands[b].active_power_dbm);
        any_band = true;
      }
    }
    if (any_band) power = mw_to_dbm(mw);
    s.bins.push_back(Bin{freqs[i], static_cast<double>(static_cast<float>(power))});
  }
  return s;
}

double expected_au(const Environment& env, const Channel& channel, Timestamp hour_start,
                   double per_bin_threshold_dbm) {
  const double noise_ceiling = env.noise_floor_dbm + kNoiseCeilingSigmas * env.noise_sigma_db;
  if (!(per_bin_threshold_dbm > noise_ceiling)) {
    throw UnsupportedConfiguration("expected_au: threshold does not clear the noise ceiling");
  }
  std::vector<Hz> in_channel;
  for (Hz f : bin_frequencies(env)) {
    if (channel.contains(f)) in_channel.push_back(f);
  }
  std::optional<std::size_t> only;
  for (std::size_t b = 0; b < env.bands.size(); ++b) {
    bool hits = false;
    for (Hz f : in_channel) hits = hits || env.bands[b].covers(f);
    if (!hits) continue;
    if (only) throw UnsupportedConfiguration("expected_au: several bands overlap the channel");
    only = b;
  }
  if (!only) {
    // Nothing can exceed the threshold in this channel.
    return 0.0;
  }
  if (!(env.bands[*only].active_power_dbm > per_bin_threshold_dbm)) {
    throw UnsupportedConfiguration("expected_au: band power does not exceed the threshold");
  }
  return 100.0 * activity_probability(env, *only, floor_hour(hour_start));
}

Environment parse_environment(std::string_view json_text, std::string_view source_name) {
  const std::string source(source_name);
  auto doc = detail::parse_json_text(json_text, source);
  detail::ObjectReader root(doc, source);
  Environment env;
  env.site_id = root.get_or<std::string>("site_id", env.site_id);
  {
    auto span = root.child("span");
    env.freq_start_hz = span.get<Hz>("start_hz");
    env.freq_stop_hz = span.get<Hz>("stop_hz");
    span.finish();
  }
  env.rbw_hz = root.get<double>("rbw_hz");
  {
    auto noise = root.child("noise");
    env.noise_floor_dbm = noise.get<double>("floor_dbm");
    env.noise_sigma_db = noise.get_or<double>("sigma_db", 0.0);
    noise.finish();
  }
  env.seed = root.get_or<std::uint64_t>("seed", 1);
  env.sweep_time_s = root.get_or<double>("sweep_time_s", 1.0);
  const auto tz_name = root.get_or<std::string>("timezone", "UTC");
  try {
    env.timezone = TimeZone::load(tz_name);
  } catch (const InvalidArgument& e) {
    root.fail("timezone", e.what());
  }
  if (root.has("bands")) {
    const auto& bands = root.raw("bands");
    if (!bands.is_array()) root.fail("bands", "expected an array");
    for (std::size_t i = 0; i < bands.size(); ++i) {
      detail::ObjectReader br(bands[i], source, "/bands/" + std::to_string(i));
      BandProfile b;
      b.center_hz = br.get<Hz>("center_hz");
      b.bandwidth_hz = br.get<Hz>("bandwidth_hz");
      b.active_power_dbm = br.get<double>("active_power_dbm");
      const auto& act = br.raw("activity");
      if (act.is_number()) {
        b.activity.fill(act.get<double>());
      } else if (act.is_array() && act.size() == 24) {
        for (std::size_t h = 0; h < 24; ++h) {
          if (!act[h].is_number()) br.fail("activity", "entries must be numbers");
          b.activity[h] = act[h].get<double>();
        }
      } else {
        br.fail("activity", "expected a probability or an array of 24 probabilities");
      }
      if (br.has("weekdays")) {
        const auto& wd = br.raw("weekdays");
        if (!wd.is_array() || wd.size() != 7) br.fail("weekdays", "expected an array of 7 booleans (Monday first)");
        for (std::size_t d = 0; d < 7; ++d) {
          if (!wd[d].is_boolean()) br.fail("weekdays", "expected booleans");
          b.weekdays[d] = wd[d].get<bool>();
        }
      }
      br.finish();
      env.bands.push_back(b);
    }
  }
  root.finish();
  try {
    validate_environment(env);
  } catch (const InvalidArgument& e) {
    throw ConfigError(source, "", e.what());
  }
  return env;
}

Environment load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read environment file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_environment(ss.str(), path.string());
}

}  // namespace specmon
