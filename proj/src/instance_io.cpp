#include "mbandit/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mbandit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("instance file: " + where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

Vector vector_of(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected a list of numbers");
    Vector out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Matrix matrix_of(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected a list of rows");
    Matrix out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(vector_of(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::size_t index_of(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
    return v.get<std::size_t>();
}

ArmModel parse_arm(const json& j, const std::string& where) {
    ArmModel arm;
    arm.transition = matrix_of(field(j, "transition", where), where + ".transition");

    std::string kind = "bernoulli";
    const json* reward = nullptr;
    if (auto it = j.find("reward"); it != j.end()) {
        reward = &*it;
        kind = field(*reward, "kind", where + ".reward").get<std::string>();
    }

    if (kind == "bernoulli") {
        arm.reward_kind = BernoulliReward{};
    } else if (kind == "gaussian") {
        double variance = 1.0;
        if (auto it = reward->find("variance"); it != reward->end()) {
            variance = number(*it, where + ".reward.variance");
        }
        arm.reward_kind = GaussianReward{variance};
    } else if (kind == "on_transition") {
        arm.reward_kind =
            TransitionReward{matrix_of(field(*reward, "matrix", where + ".reward"), where + ".reward.matrix")};
    } else {
        fail(where + ".reward.kind", "unknown reward kind '" + kind + "'");
    }

    if (auto it = j.find("reward_mean"); it != j.end()) {
        arm.reward_mean = vector_of(*it, where + ".reward_mean");
    } else if (const auto* tr = std::get_if<TransitionReward>(&arm.reward_kind)) {
        // The state mean follows from the transition rewards.
        arm.reward_mean.assign(arm.transition.size(), 0.0);
        for (std::size_t x = 0; x < arm.transition.size() && x < tr->reward.size(); ++x) {
            for (std::size_t y = 0; y < arm.transition[x].size() && y < tr->reward[x].size(); ++y) {
                arm.reward_mean[x] += arm.transition[x][y] * tr->reward[x][y];
            }
        }
    } else {
        fail(where, "missing field 'reward_mean'");
    }
    return arm;
}

InitialDistribution parse_initial(const json& j, const std::vector<std::size_t>& counts) {
    const std::string where = "initial";
    const std::string kind = field(j, "kind", where).get<std::string>();
    if (kind == "product") {
        ProductInitial init;
        const json& per_arm = field(j, "per_arm", where);
        if (!per_arm.is_array()) fail(where + ".per_arm", "expected a list");
        for (std::size_t a = 0; a < per_arm.size(); ++a) {
            init.per_arm.push_back(vector_of(per_arm[a], where + ".per_arm[" + std::to_string(a) + "]"));
        }
        return init;
    }
    if (kind == "point") {
        const json& state = field(j, "state", where);
        if (!state.is_array() || state.size() != counts.size()) {
            fail(where + ".state", "expected one local state per arm");
        }
        GlobalState s;
        for (std::size_t a = 0; a < state.size(); ++a) {
            s.push_back(index_of(state[a], where + ".state[" + std::to_string(a) + "]"));
            if (s.back() >= counts[a]) fail(where + ".state", "local state out of range");
        }
        return point_initial(counts, s);
    }
    if (kind == "coupled") {
        CoupledInitial init;
        const json& states = field(j, "states", where);
        if (!states.is_array()) fail(where + ".states", "expected a list of global states");
        for (std::size_t i = 0; i < states.size(); ++i) {
            const std::string w = where + ".states[" + std::to_string(i) + "]";
            if (!states[i].is_array()) fail(w, "expected a list of local states");
            GlobalState s;
            for (std::size_t a = 0; a < states[i].size(); ++a) s.push_back(index_of(states[i][a], w));
            init.states.push_back(std::move(s));
        }
        init.probabilities = vector_of(field(j, "probabilities", where), where + ".probabilities");
        return init;
    }
    fail(where + ".kind", "unknown initial distribution kind '" + kind + "'");
}

PriorConfig parse_prior(const json& j) {
    PriorConfig prior;
    if (auto it = j.find("transitions"); it != j.end()) {
        prior.dirichlet_concentration = number(field(*it, "dirichlet", "prior.transitions"),
                                               "prior.transitions.dirichlet");
        if (!(prior.dirichlet_concentration > 0.0)) {
            fail("prior.transitions.dirichlet", "concentration must be positive");
        }
    }
    if (auto it = j.find("rewards"); it != j.end()) {
        const std::string kind = field(*it, "kind", "prior.rewards").get<std::string>();
        if (kind == "beta") {
            prior.rewards = RewardPrior::beta;
            if (auto a = it->find("alpha"); a != it->end()) prior.beta_alpha = number(*a, "prior.rewards.alpha");
            if (auto b = it->find("beta"); b != it->end()) prior.beta_beta = number(*b, "prior.rewards.beta");
            if (!(prior.beta_alpha > 0.0 && prior.beta_beta > 0.0)) {
                fail("prior.rewards", "beta parameters must be positive");
            }
        } else if (kind == "gauss_gamma") {
            prior.rewards = RewardPrior::gauss_gamma;
        } else {
            fail("prior.rewards.kind", "unknown reward prior '" + kind + "'");
        }
    }
    return prior;
}

json matrix_json(const Matrix& m) {
    json out = json::array();
    for (const auto& row : m) out.push_back(row);
    return out;
}

}  // namespace

InstanceFile parse_instance(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("instance file: ") + e.what());
    }

    InstanceFile out;
    out.instance.discount = number(field(root, "discount", "root"), "discount");
    const json& arms = field(root, "arms", "root");
    if (!arms.is_array()) fail("arms", "expected a list");
    for (std::size_t a = 0; a < arms.size(); ++a) {
        out.instance.arms.push_back(parse_arm(arms[a], "arms[" + std::to_string(a) + "]"));
    }

    const auto counts = out.instance.state_counts();
    if (auto it = root.find("initial"); it != root.end()) {
        out.instance.initial = parse_initial(*it, counts);
    } else {
        out.instance.initial = point_initial(counts, GlobalState(counts.size(), 0));
    }
    if (auto it = root.find("prior"); it != root.end()) out.prior = parse_prior(*it);
    return out;
}

InstanceFile load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

std::string dump_instance(const BanditInstance& instance, const std::optional<PriorConfig>& prior) {
    json root;
    root["discount"] = instance.discount;
    root["arms"] = json::array();
    for (const ArmModel& arm : instance.arms) {
        json a;
        a["reward_mean"] = arm.reward_mean;
        a["transition"] = matrix_json(arm.transition);
        json reward;
        reward["kind"] = reward_kind_name(arm.reward_kind);
        if (const auto* g = std::get_if<GaussianReward>(&arm.reward_kind)) {
            reward["variance"] = g->variance;
        } else if (const auto* tr = std::get_if<TransitionReward>(&arm.reward_kind)) {
            reward["matrix"] = matrix_json(tr->reward);
        }
        a["reward"] = reward;
        root["arms"].push_back(a);
    }

    json initial;
    if (const auto* product = std::get_if<ProductInitial>(&instance.initial)) {
        initial["kind"] = "product";
        initial["per_arm"] = matrix_json(product->per_arm);
    } else {
        const auto& coupled = std::get<CoupledInitial>(instance.initial);
        initial["kind"] = "coupled";
        initial["states"] = coupled.states;
        initial["probabilities"] = coupled.probabilities;
    }
    root["initial"] = initial;

    if (prior) {
        json p;
        p["transitions"] = {{"dirichlet", prior->dirichlet_concentration}};
        if (prior->rewards == RewardPrior::beta) {
            p["rewards"] = {{"kind", "beta"}, {"alpha", prior->beta_alpha}, {"beta", prior->beta_beta}};
        } else {
            p["rewards"] = {{"kind", "gauss_gamma"}};
        }
        root["prior"] = p;
    }
    return root.dump(2) + "\n";
}

}  // namespace mbandit
