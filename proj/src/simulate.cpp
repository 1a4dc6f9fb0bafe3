#include "capmsize/simulate.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "capmsize/errors.hpp"
#include "capmsize/textio.hpp"

namespace capmsize {

namespace {

// Paths wandering past this are treated as divergent rather than simulated on.
constexpr double kBlowUpThreshold = 1e6;

long step_count(double horizon, double dt) {
    const double raw = horizon / dt;
    const long steps = std::lround(raw);
    if (steps < 1 || std::abs(raw - static_cast<double>(steps)) > 1e-9 * std::max(1.0, raw)) {
        throw DomainError("horizon must be an integer number of steps (horizon/dt = " +
                          format_double(raw) + ")");
    }
    return steps;
}

void check_state(const PathState& state, long path, long step) {
    for (Eigen::Index k = 0; k < state.c.size(); ++k) {
        const double c = state.c[k];
        if (!std::isfinite(c) || std::abs(c) > kBlowUpThreshold) {
            throw BlowUpError("relative size " + std::to_string(k) + " left [-1e6, 1e6] on path " +
                                  std::to_string(path) + ", step " + std::to_string(step),
                              path, step);
        }
        if (!std::isfinite(state.log_wealth[k])) {
            throw BlowUpError("log wealth " + std::to_string(k) + " became non-finite on path " +
                                  std::to_string(path) + ", step " + std::to_string(step),
                              path, step);
        }
    }
    if (!std::isfinite(state.log_benchmark_size) || !std::isfinite(state.log_benchmark_wealth)) {
        throw BlowUpError("benchmark state became non-finite on path " + std::to_string(path) +
                              ", step " + std::to_string(step),
                          path, step);
    }
}

}  // namespace

void SimulationConfig::validate() const {
    model.validate();
    if (initial.relative_sizes.size() != model.n) {
        throw DomainError("initial relative sizes have length " +
                          std::to_string(initial.relative_sizes.size()) + ", expected " +
                          std::to_string(model.n));
    }
    if (initial.log_wealth.size() != 0 && initial.log_wealth.size() != model.n) {
        throw DomainError("initial log wealth must be empty or of length " +
                          std::to_string(model.n));
    }
    if (!initial.relative_sizes.allFinite()) throw DomainError("initial relative sizes not finite");
    if (initial.log_wealth.size() != 0 && !initial.log_wealth.allFinite()) {
        throw DomainError("initial log wealth not finite");
    }
    if (!std::isfinite(initial.log_benchmark_size) || !std::isfinite(initial.log_benchmark_wealth)) {
        throw DomainError("initial benchmark state not finite");
    }
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (paths < 1) throw DomainError("paths must be at least 1");
    if (record_stride < 1) throw DomainError("record_stride must be at least 1");
    const long steps = step_count(horizon, dt);
    if (steps % record_stride != 0) {
        throw DomainError("record_stride must divide the step count " + std::to_string(steps));
    }
}

Eigen::MatrixXd correlation_factor(Eigen::Ref<const Eigen::MatrixXd> correlation) {
    const auto n = correlation.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(correlation);
    if (solver.info() != Eigen::Success) throw DomainError("correlation eigendecomposition failed");
    Eigen::VectorXd eig = solver.eigenvalues();
    const double floor = -1e-10 * static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig[i] < floor) {
            throw DomainError("correlation matrix is not positive semidefinite (eigenvalue " +
                              format_double(eig[i]) + ")");
        }
        eig[i] = std::max(eig[i], 0.0);
    }
    const Eigen::MatrixXd& v = solver.eigenvectors();
    return v * eig.cwiseSqrt().asDiagonal() * v.transpose();
}

BenchmarkIncrement sample_benchmark_increments(const BenchmarkDynamics& benchmark, double dt,
                                               PathRng& rng) {
    const double sqrt_dt = std::sqrt(dt);
    const double z_size = rng.normal();
    const double z_wealth = rng.normal();
    BenchmarkIncrement inc;
    inc.d_log_size = benchmark.size_drift * dt + benchmark.size_vol * sqrt_dt * z_size;
    const double rho = benchmark.correlation;
    inc.d_log_wealth = benchmark.wealth_drift * dt +
                       benchmark.wealth_vol * sqrt_dt *
                           (rho * z_size + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z_wealth);
    return inc;
}

void euler_step(const MarketModel& model, PathState& state, double d_log_benchmark_size,
                double d_log_benchmark_wealth, Eigen::Ref<const Eigen::VectorXd> dw, double dt) {
    for (Eigen::Index k = 0; k < state.c.size(); ++k) {
        const SizeCoefficients coef = eval_coefficients(model, state.c[k]);
        state.c[k] += -coef.alpha * dt + (1.0 - coef.beta) * d_log_benchmark_size +
                      coef.sigma * dw[k];
        state.log_wealth[k] += coef.alpha_wealth * dt + coef.beta * d_log_benchmark_wealth +
                               coef.sigma * dw[k];
    }
    state.log_benchmark_size += d_log_benchmark_size;
    state.log_benchmark_wealth += d_log_benchmark_wealth;
}

SimulationEnsemble simulate(const SimulationConfig& config) {
    config.validate();
    const Eigen::Index n = config.model.n;
    const long steps = step_count(config.horizon, config.dt);
    const long stride = config.record_stride;
    const long n_records = steps / stride + 1;
    const double dt = config.dt;
    const double sqrt_dt = std::sqrt(dt);

    double mu = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    if (config.scheme == Scheme::exact_linear &&
        !is_linear_market(config.model, &mu, &gamma, &rho)) {
        throw DomainError("the exact scheme needs linear alpha and beta and constant sigma");
    }

    const Eigen::MatrixXd factor = correlation_factor(config.model.noise_correlation);
    const double g_s = config.model.benchmark.size_drift;
    const double sigma_s = config.model.benchmark.size_vol;

    SimulationEnsemble out;
    out.seed = config.seed;
    out.rng = PathRng::name();
    out.scheme = config.scheme;
    out.dt = dt;
    out.record_stride = config.record_stride;
    out.times.resize(n_records);
    for (long r = 0; r < n_records; ++r) out.times[r] = static_cast<double>(r * stride) * dt;
    out.relative_sizes.resize(static_cast<std::size_t>(config.paths));
    out.log_sizes.resize(static_cast<std::size_t>(config.paths));
    out.log_wealth.resize(static_cast<std::size_t>(config.paths));
    out.log_benchmark_size.resize(n_records, config.paths);
    out.log_benchmark_wealth.resize(n_records, config.paths);

    for (long path = 0; path < config.paths; ++path) {
        PathRng rng(config.seed, static_cast<std::uint64_t>(path));
        PathState state;
        state.c = config.initial.relative_sizes;
        state.log_wealth = config.initial.log_wealth.size() == 0
                               ? Eigen::VectorXd::Zero(n).eval()
                               : config.initial.log_wealth;
        state.log_benchmark_size = config.initial.log_benchmark_size;
        state.log_benchmark_wealth = config.initial.log_benchmark_wealth;

        auto& c_rec = out.relative_sizes[static_cast<std::size_t>(path)];
        auto& s_rec = out.log_sizes[static_cast<std::size_t>(path)];
        auto& v_rec = out.log_wealth[static_cast<std::size_t>(path)];
        c_rec.resize(n_records, n);
        s_rec.resize(n_records, n);
        v_rec.resize(n_records, n);

        long record = 0;
        auto record_state = [&]() {
            c_rec.row(record) = state.c.transpose();
            s_rec.row(record) =
                (Eigen::VectorXd::Constant(n, state.log_benchmark_size) - state.c).transpose();
            v_rec.row(record) = state.log_wealth.transpose();
            out.log_benchmark_size(record, path) = state.log_benchmark_size;
            out.log_benchmark_wealth(record, path) = state.log_benchmark_wealth;
            ++record;
        };
        record_state();

        // Exact-scheme accumulators: the benchmark Brownian path W_S, the
        // running log of the homogeneous solution Z and the stochastic
        // integral I_k of 1/Z against each W_k.
        const Eigen::VectorXd c0 = state.c;
        double w_s = 0.0;
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(n);
        double log_z = 0.0;

        Eigen::VectorXd z(n);
        Eigen::VectorXd dw(n);
        for (long step = 0; step < steps; ++step) {
            const double z_size = rng.normal();
            const double z_wealth = rng.normal();
            for (Eigen::Index k = 0; k < n; ++k) z[k] = rng.normal();
            dw.noalias() = sqrt_dt * (factor * z);

            BenchmarkIncrement inc;
            inc.d_log_size = g_s * dt + sigma_s * sqrt_dt * z_size;
            const double corr = config.model.benchmark.correlation;
            inc.d_log_wealth =
                config.model.benchmark.wealth_drift * dt +
                config.model.benchmark.wealth_vol * sqrt_dt *
                    (corr * z_size + std::sqrt(std::max(0.0, 1.0 - corr * corr)) * z_wealth);

            if (config.scheme == Scheme::euler) {
                euler_step(config.model, state, inc.d_log_size, inc.d_log_wealth, dw, dt);
            } else {
                // Wealth has no closed form; advance it with the same frozen
                // coefficients an explicit step would use, on the exact c path.
                for (Eigen::Index k = 0; k < n; ++k) {
                    const SizeCoefficients coef = eval_coefficients(config.model, state.c[k]);
                    state.log_wealth[k] += coef.alpha_wealth * dt +
                                           coef.beta * inc.d_log_wealth + coef.sigma * dw[k];
                }
                integral += std::exp(-log_z) * rho * dw;
                const double t_next = static_cast<double>(step + 1) * dt;
                w_s += sqrt_dt * z_size;
                log_z = -(mu + gamma * g_s) * t_next - gamma * sigma_s * w_s -
                        0.5 * gamma * gamma * sigma_s * sigma_s * t_next;
                state.c = std::exp(log_z) * (c0 + integral);
                state.log_benchmark_size += inc.d_log_size;
                state.log_benchmark_wealth += inc.d_log_wealth;
            }
            check_state(state, path, step + 1);
            if ((step + 1) % stride == 0) record_state();
        }
    }
    return out;
}

const char* scheme_name(Scheme scheme) {
    return scheme == Scheme::euler ? "euler" : "exact";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "euler") return Scheme::euler;
    if (name == "exact") return Scheme::exact_linear;
    throw DomainError("unknown scheme '" + name + "' (expected euler or exact)");
}

void write_ensemble_csv(const SimulationEnsemble& ensemble, const std::string& path,
                        const std::string& config_echo) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << "# " << config_echo << "\n";
    out << "path,time,series,value\n";
    const auto n_records = ensemble.times.size();
    const Eigen::Index n = ensemble.relative_sizes.empty() ? 0 : ensemble.relative_sizes[0].cols();
    for (std::size_t p = 0; p < ensemble.relative_sizes.size(); ++p) {
        const auto& c = ensemble.relative_sizes[p];
        const auto& s = ensemble.log_sizes[p];
        const auto& v = ensemble.log_wealth[p];
        for (Eigen::Index r = 0; r < n_records; ++r) {
            const std::string prefix =
                std::to_string(p) + "," + format_double(ensemble.times[r]) + ",";
            for (Eigen::Index k = 0; k < n; ++k) {
                out << prefix << "C_" << (k + 1) << "," << format_double(c(r, k)) << "\n";
            }
            out << prefix << "ln_S_0," << format_double(ensemble.log_benchmark_size(r, p)) << "\n";
            out << prefix << "ln_V_0," << format_double(ensemble.log_benchmark_wealth(r, p))
                << "\n";
            for (Eigen::Index k = 0; k < n; ++k) {
                out << prefix << "ln_S_" << (k + 1) << "," << format_double(s(r, k)) << "\n";
            }
            for (Eigen::Index k = 0; k < n; ++k) {
                out << prefix << "ln_V_" << (k + 1) << "," << format_double(v(r, k)) << "\n";
            }
        }
    }
    if (!out) throw InputError("write to " + path + " failed");
}

namespace {

constexpr char kMagic[4] = {'C', 'S', 'E', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError(path + ": truncated ensemble file");
    return value;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_raw(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const std::string& path) {
    const auto len = read_raw<std::uint32_t>(in, path);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw ParseError(path + ": truncated ensemble file");
    return s;
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_raw(out, m(r, c));
    }
}

void read_matrix(std::ifstream& in, Eigen::MatrixXd& m, const std::string& path) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_raw<double>(in, path);
    }
}

}  // namespace

void write_ensemble_binary(const SimulationEnsemble& ensemble, const std::string& path,
                           const std::string& config_echo) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, kVersion);
    const auto n = static_cast<std::uint32_t>(
        ensemble.relative_sizes.empty() ? 0 : ensemble.relative_sizes[0].cols());
    write_raw(out, n);
    write_raw(out, static_cast<std::uint32_t>(ensemble.relative_sizes.size()));
    write_raw(out, static_cast<std::uint32_t>(ensemble.times.size()));
    write_raw(out, ensemble.seed);
    write_raw(out, static_cast<std::uint32_t>(ensemble.scheme == Scheme::euler ? 0 : 1));
    write_raw(out, ensemble.dt);
    write_raw(out, static_cast<std::uint32_t>(ensemble.record_stride));
    write_string(out, config_echo);
    write_string(out, ensemble.rng);
    for (Eigen::Index r = 0; r < ensemble.times.size(); ++r) write_raw(out, ensemble.times[r]);
    for (const auto& m : ensemble.relative_sizes) write_matrix(out, m);
    for (const auto& m : ensemble.log_wealth) write_matrix(out, m);
    write_matrix(out, ensemble.log_benchmark_size);
    write_matrix(out, ensemble.log_benchmark_wealth);
    if (!out) throw InputError("write to " + path + " failed");
}

SimulationEnsemble read_ensemble_binary(const std::string& path, std::string* config_echo) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError(path + ": not an ensemble file");
    }
    const auto version = read_raw<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw ParseError(path + ": unsupported ensemble version " + std::to_string(version));
    }
    const auto n = read_raw<std::uint32_t>(in, path);
    const auto paths = read_raw<std::uint32_t>(in, path);
    const auto records = read_raw<std::uint32_t>(in, path);

    SimulationEnsemble out;
    out.seed = read_raw<std::uint64_t>(in, path);
    out.scheme = read_raw<std::uint32_t>(in, path) == 0 ? Scheme::euler : Scheme::exact_linear;
    out.dt = read_raw<double>(in, path);
    out.record_stride = static_cast<int>(read_raw<std::uint32_t>(in, path));
    const std::string echo = read_string(in, path);
    if (config_echo != nullptr) *config_echo = echo;
    out.rng = read_string(in, path);
    out.times.resize(records);
    for (std::uint32_t r = 0; r < records; ++r) out.times[r] = read_raw<double>(in, path);
    out.relative_sizes.assign(paths, Eigen::MatrixXd(records, n));
    out.log_wealth.assign(paths, Eigen::MatrixXd(records, n));
    for (auto& m : out.relative_sizes) read_matrix(in, m, path);
    for (auto& m : out.log_wealth) read_matrix(in, m, path);
    out.log_benchmark_size.resize(records, paths);
    out.log_benchmark_wealth.resize(records, paths);
    read_matrix(in, out.log_benchmark_size, path);
    read_matrix(in, out.log_benchmark_wealth, path);
    out.log_sizes.assign(paths, Eigen::MatrixXd(records, n));
    for (std::uint32_t p = 0; p < paths; ++p) {
        for (std::uint32_t r = 0; r < records; ++r) {
            out.log_sizes[p].row(r) =
                Eigen::VectorXd::Constant(n, out.log_benchmark_size(r, p)).transpose() -
                out.relative_sizes[p].row(r);
        }
    }
    return out;
}

}  // namespace capmsize
