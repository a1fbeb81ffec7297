#ifndef SNSQKD_MODEL_HPP
#define SNSQKD_MODEL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace snsqkd {

// Thrown on any parameter/domain violation; the CLI maps it to exit code 1.
class validation_error : public std::runtime_error {
  public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

enum class PhaseMode { compensation, post_selection };

// Window classification by the two send decisions. The x_plus/x_minus
// classes exist only inside the verification oracle's virtual protocol.
enum class WindowClass : std::uint8_t {
    ztilde_a = 0,  // Alice sends, Bob does not
    ztilde_b = 1,  // Bob sends, Alice does not
    both = 2,      // both send
    neither = 3,   // neither sends
    x_plus = 4,
    x_minus = 5,
};

constexpr int kNumRealClasses = 4;
constexpr int kNumClasses = 6;

const char* to_string(WindowClass c);
const char* to_string(PhaseMode m);

struct ProtocolParams {
    double mu = 0.5;              // mean photon number per coherent pulse
    double q = 0.3;               // per-party sending probability
    double lambda_ps = 0.1;       // post-selection acceptance |lambda|
    double f = 1.1;               // error-correction efficiency factor
    std::int64_t n_windows = 1000000;
    PhaseMode phase_mode = PhaseMode::compensation;
    double test_fraction_v = 0.1;

    // Optional knobs, both default off.
    double intensity_jitter = 0.0;    // per-window intensity in [mu*(1-jitter), mu]
    bool subtract_test_bits = false;  // remove the disclosed v fraction from the key

    void validate() const;
};

struct ChannelParams {
    double distance_km = 100.0;
    double loss_db_per_km = 0.2;
    double eta_det = 0.8;
    double p_dark = 1e-11;
    double e_a = 0.0;               // single-photon-interference misalignment
    double charlie_position = 0.5;  // fractional distance from Alice

    void validate() const;
};

// Prior probability of one window class: q(1-q) for each ztilde half,
// q^2 for both, (1-q)^2 for neither. Rejects virtual classes.
double window_class_prior(const ProtocolParams& params, WindowClass c);

// Prior of the merged Ztilde class, 2q(1-q).
double ztilde_prior(const ProtocolParams& params);

// Detector efficiency times the fiber transmittance of one arm. The
// end-to-end fiber transmittance is 10^(-loss_db_per_km*L/20), i.e.
// 10^(-L/100) at the 0.2 default, and splits between the arms at
// charlie_position.
double arm_transmittance(const ChannelParams& ch);

// Transmittance of the arm from one party (0 = Alice side, 1 = Bob side);
// equals arm_transmittance for the midpoint split.
double arm_transmittance(const ChannelParams& ch, int side);

struct DetectorEvent {
    bool left_click = false;
    bool right_click = false;

    bool effective() const { return left_click != right_click; }
};

// Strict JSON bindings: unknown fields are a validation_error, so typos in
// experiment configs fail loudly.
ProtocolParams protocol_params_from_json(const nlohmann::json& j);
ChannelParams channel_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProtocolParams& p);
nlohmann::json to_json(const ChannelParams& c);

}  // namespace snsqkd

#endif  // SNSQKD_MODEL_HPP
