#include "snsqkd/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace snsqkd {

const char* to_string(WindowClass c) {
    switch (c) {
        case WindowClass::ztilde_a: return "ztilde_a";
        case WindowClass::ztilde_b: return "ztilde_b";
        case WindowClass::both: return "both";
        case WindowClass::neither: return "neither";
        case WindowClass::x_plus: return "x_plus";
        case WindowClass::x_minus: return "x_minus";
    }
    return "?";
}

const char* to_string(PhaseMode m) {
    return m == PhaseMode::compensation ? "compensation" : "postselection";
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// Message strings are built only in the throwing branch; validate() sits on
// hot paths (grid search, per-node quadrature).
[[noreturn]] void fail(const std::string& field, const std::string& constraint, double got) {
    throw validation_error(field + " must be " + constraint + " (got " + num(got) + ")");
}

}  // namespace

void ProtocolParams::validate() const {
    if (!(mu > 0.0)) fail("protocol.mu", "> 0", mu);
    if (!(q > 0.0 && q < 1.0)) fail("protocol.q", "in (0,1)", q);
    if (!(lambda_ps >= 0.0 && lambda_ps <= 1.0)) fail("protocol.lambda_ps", "in [0,1]", lambda_ps);
    if (!(f >= 1.0)) fail("protocol.f", ">= 1", f);
    if (!(n_windows >= 1)) fail("protocol.n_windows", ">= 1", static_cast<double>(n_windows));
    if (!(test_fraction_v > 0.0 && test_fraction_v < 1.0)) {
        fail("protocol.test_fraction_v", "in (0,1)", test_fraction_v);
    }
    if (!(intensity_jitter >= 0.0 && intensity_jitter < 1.0)) {
        fail("protocol.intensity_jitter", "in [0,1)", intensity_jitter);
    }
}

void ChannelParams::validate() const {
    if (!(distance_km >= 0.0)) fail("channel.distance_km", ">= 0", distance_km);
    if (!(loss_db_per_km >= 0.0)) fail("channel.loss_db_per_km", ">= 0", loss_db_per_km);
    if (!(eta_det > 0.0 && eta_det <= 1.0)) fail("channel.eta_det", "in (0,1]", eta_det);
    if (!(p_dark >= 0.0 && p_dark <= 1.0)) fail("channel.p_dark", "in [0,1]", p_dark);
    if (!(e_a >= 0.0 && e_a <= 0.5)) fail("channel.e_a", "in [0,0.5]", e_a);
    if (!(charlie_position > 0.0 && charlie_position < 1.0)) {
        fail("channel.charlie_position", "in (0,1)", charlie_position);
    }
}

double window_class_prior(const ProtocolParams& params, WindowClass c) {
    params.validate();
    const double q = params.q;
    switch (c) {
        case WindowClass::ztilde_a:
        case WindowClass::ztilde_b:
            return q * (1.0 - q);
        case WindowClass::both:
            return q * q;
        case WindowClass::neither:
            return (1.0 - q) * (1.0 - q);
        default:
            throw validation_error(std::string("window_class_prior: ") + to_string(c) +
                                   " is a virtual class with no real-protocol prior");
    }
}

double ztilde_prior(const ProtocolParams& params) {
    return 2.0 * params.q * (1.0 - params.q);
}

double arm_transmittance(const ChannelParams& ch, int side) {
    ch.validate();
    const double frac = side == 0 ? ch.charlie_position : 1.0 - ch.charlie_position;
    const double arm_km = ch.distance_km * frac;
    const double fiber = std::pow(10.0, -ch.loss_db_per_km * arm_km / 20.0);
    return ch.eta_det * fiber;
}

double arm_transmittance(const ChannelParams& ch) {
    return arm_transmittance(ch, 0);
}

namespace {

// Reject fields outside `allowed` so config typos surface immediately.
void check_fields(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& scope) {
    if (!j.is_object()) throw validation_error(scope + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw validation_error(scope + ": unknown field \"" + it.key() + "\"");
        }
    }
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw validation_error(std::string("field \"") + key + "\" has the wrong type");
        }
    }
}

}  // namespace

ProtocolParams protocol_params_from_json(const nlohmann::json& j) {
    check_fields(j,
                 {"mu", "q", "lambda_ps", "f", "n_windows", "phase_mode", "test_fraction_v",
                  "intensity_jitter", "subtract_test_bits"},
                 "protocol");
    ProtocolParams p;
    read_if(j, "mu", p.mu);
    read_if(j, "q", p.q);
    read_if(j, "lambda_ps", p.lambda_ps);
    read_if(j, "f", p.f);
    read_if(j, "n_windows", p.n_windows);
    read_if(j, "test_fraction_v", p.test_fraction_v);
    read_if(j, "intensity_jitter", p.intensity_jitter);
    read_if(j, "subtract_test_bits", p.subtract_test_bits);
    if (auto it = j.find("phase_mode"); it != j.end()) {
        const std::string m = it->get<std::string>();
        if (m == "compensation") {
            p.phase_mode = PhaseMode::compensation;
        } else if (m == "postselection" || m == "post_selection") {
            p.phase_mode = PhaseMode::post_selection;
        } else {
            throw validation_error("protocol.phase_mode must be \"compensation\" or \"postselection\"");
        }
    }
    p.validate();
    return p;
}

ChannelParams channel_params_from_json(const nlohmann::json& j) {
    check_fields(j,
                 {"distance_km", "loss_db_per_km", "eta_det", "p_dark", "e_a",
                  "charlie_position"},
                 "channel");
    ChannelParams c;
    read_if(j, "distance_km", c.distance_km);
    read_if(j, "loss_db_per_km", c.loss_db_per_km);
    read_if(j, "eta_det", c.eta_det);
    read_if(j, "p_dark", c.p_dark);
    read_if(j, "e_a", c.e_a);
    read_if(j, "charlie_position", c.charlie_position);
    c.validate();
    return c;
}

nlohmann::json to_json(const ProtocolParams& p) {
    return {
        {"mu", p.mu},
        {"q", p.q},
        {"lambda_ps", p.lambda_ps},
        {"f", p.f},
        {"n_windows", p.n_windows},
        {"phase_mode", to_string(p.phase_mode)},
        {"test_fraction_v", p.test_fraction_v},
        {"intensity_jitter", p.intensity_jitter},
        {"subtract_test_bits", p.subtract_test_bits},
    };
}

nlohmann::json to_json(const ChannelParams& c) {
    return {
        {"distance_km", c.distance_km},
        {"loss_db_per_km", c.loss_db_per_km},
        {"eta_det", c.eta_det},
        {"p_dark", c.p_dark},
        {"e_a", c.e_a},
        {"charlie_position", c.charlie_position},
    };
}

}  // namespace snsqkd
