#include "pmmh/model.hpp"

#include "pmmh/errors.hpp"

namespace pmmh {

std::vector<double> simulate_series(const ModelDefinition& model,
                                    const ParameterVector& theta, int T, Rng& rng,
                                    std::vector<double>* states) {
    if (!model.sample_observation)
        throw ConfigError("model '" + model.name + "' has no observation sampler");
    std::vector<double> cur(static_cast<std::size_t>(model.state_dim));
    std::vector<double> next(static_cast<std::size_t>(model.state_dim));
    StateView cur_v{cur.data(), 1, model.state_dim};
    StateView next_v{next.data(), 1, model.state_dim};

    model.sample_initial(theta, cur_v, rng);
    std::vector<double> y(static_cast<std::size_t>(T));
    if (states) states->assign(static_cast<std::size_t>(T) * model.moment_dim, 0.0);
    for (int t = 1; t <= T; ++t) {
        model.sample_transition(theta, cur_v, next_v, t, rng);
        std::swap(cur, next);
        cur_v.data = cur.data();
        next_v.data = next.data();
        y[static_cast<std::size_t>(t - 1)] =
            model.sample_observation(theta, cur_v.row(0), t, rng);
        if (states) {
            for (int j = 0; j < model.moment_dim; ++j)
                (*states)[static_cast<std::size_t>(t - 1) * model.moment_dim + j] = cur[static_cast<std::size_t>(j)];
        }
    }
    return y;
}

} // namespace pmmh
