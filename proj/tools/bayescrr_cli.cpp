// Command-line front end: calibrate, price, roll, utility, baselines.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bayescrr.hpp"

namespace fs = std::filesystem;
using namespace bayescrr;

namespace {

struct McmcOptions {
    std::size_t iterations = 10000;
    std::size_t burn_in = 1000;
    std::size_t thin = 5;
    bool tuner_literal = false;
    std::size_t tuner_blocks = 50;
    double u_upper = 2.0;

    void add(CLI::App& app) {
        app.add_option("--iterations", iterations, "Main-chain iterations")->capture_default_str();
        app.add_option("--burn-in", burn_in, "Discarded leading iterations")->capture_default_str();
        app.add_option("--thin", thin, "Keep every n-th post-burn-in iteration")->capture_default_str();
        app.add_flag("--tuner-literal", tuner_literal, "Halve the proposal variance on high acceptance (literal rule)");
        app.add_option("--tuner-blocks", tuner_blocks, "Cap on 100-iteration tuning blocks")->capture_default_str();
        app.add_option("--u-upper", u_upper, "Upper bound of the uniform prior on u*")->capture_default_str();
    }

    ChainConfig chain_config(std::uint64_t seed) const {
        ChainConfig c;
        c.iterations = iterations;
        c.burn_in = burn_in;
        c.thin = thin;
        c.seed = seed;
        c.tuner.literal = tuner_literal;
        c.tuner.max_blocks = tuner_blocks;
        return c;
    }
};

struct PropagationOptions {
    std::size_t theta_draws = 5000;
    std::size_t xi_per_theta = 100;
    std::size_t xi_draws = 5000;
    std::size_t bins = 100;
    bool bin_free = false;
    std::string resampling = "systematic";
    std::size_t expected_draws = 5000;
    std::size_t replicates = 5000;

    void add(CLI::App& app, bool bootstrap) {
        app.add_option("--theta-draws", theta_draws, "theta method: draws of theta")->capture_default_str();
        app.add_option("--xi-per-theta", xi_per_theta, "theta method: xi draws per theta")->capture_default_str();
        app.add_option("--xi-draws", xi_draws, "xi method: posterior-predictive draws")->capture_default_str();
        app.add_option("--bins", bins, "xi method: bins per axis")->capture_default_str();
        app.add_flag("--bin-free", bin_free, "xi method: price raw draws instead of bin centres");
        app.add_option("--resampling", resampling, "xi method: systematic or multinomial")
            ->check(CLI::IsMember({"systematic", "multinomial"}))
            ->capture_default_str();
        app.add_option("--expected-draws", expected_draws, "expected-xi method: draws of theta")->capture_default_str();
        if (bootstrap) app.add_option("--replicates", replicates, "Bootstrap replicates")->capture_default_str();
    }

    ThetaMethodConfig theta(unsigned workers) const { return {theta_draws, xi_per_theta, workers}; }

    XiMethodConfig xi(unsigned workers) const {
        XiMethodConfig c;
        c.xi_draws = xi_draws;
        c.bins_per_axis = bins;
        c.bin_free = bin_free;
        c.resampling = resampling == "multinomial" ? Resampling::multinomial : Resampling::systematic;
        c.workers = workers;
        return c;
    }

    ExpectedXiConfig expected(unsigned workers) const { return {expected_draws, workers}; }
};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) out.push_back(method_from_string(n));
    return out;
}

OptionKind parse_kind(const std::string& kind) {
    if (kind == "call") return OptionKind::european_call;
    if (kind == "put") return OptionKind::european_put;
    throw validation_error("option kind must be 'call' or 'put'");
}

/// Trailing `window` gross returns ending at `end` (default: last row).
std::pair<std::size_t, ReturnSeries> window_returns(const PriceSeriesFile& series, std::size_t window,
                                                    const std::string& end_date, double annual_rate) {
    if (series.size() < window + 1) throw validation_error("series shorter than window + 1 closes");
    std::size_t t = series.size() - 1;
    if (!end_date.empty()) {
        const Date end = Date::parse(end_date);
        auto it = std::find(series.dates.begin(), series.dates.end(), end);
        if (it == series.dates.end()) throw validation_error("end date not in series: " + end_date);
        t = static_cast<std::size_t>(it - series.dates.begin());
        if (t < window) throw validation_error("end date leaves fewer than window returns");
    }
    ReturnSeries returns;
    returns.r_f = per_period_rate(series.rate[t].value_or(annual_rate));
    for (std::size_t i = t + 1 - window; i <= t; ++i) returns.values.push_back(series.closes[i] / series.closes[i - 1]);
    if (returns.ties() > 0)
        std::cerr << "warning: " << returns.ties() << " return(s) equal to 1+r_f counted as up moves\n";
    return {t, returns};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian calibration of binomial trees and posterior option-price distributions"};
    app.set_config("--config", "", "Config file (TOML/INI); command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out_dir = "out";
    app.add_option("--seed", seed, "Root random seed")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads (results do not depend on this)")->capture_default_str();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();

    // calibrate ---------------------------------------------------------------
    auto* calibrate = app.add_subcommand("calibrate", "Run the sampler on one window; write the chain and diagnostics");
    std::string cal_input, cal_end;
    std::size_t cal_window = 252, cal_lag = 40;
    double cal_rate = 0.0;
    McmcOptions cal_mcmc;
    calibrate->add_option("--input", cal_input, "Price series CSV (date,close[,market_option_price][,rate])")->required();
    calibrate->add_option("--window", cal_window, "Returns per window")->capture_default_str();
    calibrate->add_option("--end-date", cal_end, "Last date of the window (default: last row)");
    calibrate->add_option("--rate", cal_rate, "Annualized risk-free rate when the series has none")->capture_default_str();
    calibrate->add_option("--acf-lag", cal_lag, "Maximum autocorrelation lag")->capture_default_str();
    cal_mcmc.add(*calibrate);

    // price -------------------------------------------------------------------
    auto* price = app.add_subcommand("price", "Propagate a chain file into option-price distributions");
    std::string pr_chain, pr_kind = "call";
    double pr_spot = 0.0, pr_strike = 0.0, pr_rate = 0.0;
    int pr_periods = 0;
    std::vector<std::string> pr_methods{"theta", "xi", "expected_xi"};
    PropagationOptions pr_prop;
    price->add_option("--chain", pr_chain, "Chain CSV written by calibrate")->required();
    price->add_option("--spot", pr_spot, "Underlying price")->required();
    price->add_option("--strike", pr_strike, "Strike")->required();
    price->add_option("--periods", pr_periods, "Tree steps to maturity")->required();
    price->add_option("--rate", pr_rate, "Annualized risk-free rate (converted per business day)")->capture_default_str();
    price->add_option("--kind", pr_kind, "call or put")->capture_default_str();
    price->add_option("--methods", pr_methods, "Any of theta, xi, expected_xi")->delimiter(',');
    pr_prop.add(*price, false);

    // roll --------------------------------------------------------------------
    auto* roll = app.add_subcommand("roll", "Rolling-window experiment up to maturity");
    std::string ro_input, ro_maturity, ro_first, ro_kind = "call";
    double ro_strike = 0.0, ro_rate = 0.0;
    std::size_t ro_window = 252;
    bool ro_keep = false;
    std::vector<std::string> ro_methods{"xi", "theta", "expected_xi", "sm", "bm", "bv"};
    McmcOptions ro_mcmc;
    PropagationOptions ro_prop;
    roll->add_option("--input", ro_input, "Price series CSV")->required();
    roll->add_option("--strike", ro_strike, "Strike")->required();
    roll->add_option("--maturity", ro_maturity, "Maturity date (ISO-8601)")->required();
    roll->add_option("--first-date", ro_first, "Earliest evaluation date");
    roll->add_option("--window", ro_window, "Returns per window")->capture_default_str();
    roll->add_option("--rate", ro_rate, "Annualized risk-free rate when the series has none")->capture_default_str();
    roll->add_option("--kind", ro_kind, "call or put")->capture_default_str();
    roll->add_option("--methods", ro_methods, "Subset of xi,theta,expected_xi,sm,bm,bv")->delimiter(',');
    roll->add_flag("--keep-samples", ro_keep, "Write per-date sample files");
    ro_mcmc.add(*roll);
    ro_prop.add(*roll, true);

    // utility -----------------------------------------------------------------
    auto* utility = app.add_subcommand("utility", "Expected-utility quote for P(theta)=Phi(theta/2)-Phi(-theta/2)");
    double ut_shape = 2.0, ut_rate = 1.0, ut_theta_max = 30.0, ut_qmin = 0.0, ut_qmax = 1.0, ut_sell = 0.5;
    std::size_t ut_prior_points = 30001, ut_quote_points = 1001;
    std::string ut_kind = "quadratic";
    std::optional<double> ut_threshold;
    utility->add_option("--shape", ut_shape, "Gamma prior shape")->capture_default_str();
    utility->add_option("--rate-param", ut_rate, "Gamma prior rate")->capture_default_str();
    utility->add_option("--theta-max", ut_theta_max, "Upper end of the prior grid")->capture_default_str();
    utility->add_option("--prior-points", ut_prior_points, "Prior grid points")->capture_default_str();
    utility->add_option("--quote-min", ut_qmin, "Lowest candidate quote")->capture_default_str();
    utility->add_option("--quote-max", ut_qmax, "Highest candidate quote")->capture_default_str();
    utility->add_option("--quote-points", ut_quote_points, "Candidate quotes on the grid")->capture_default_str();
    utility->add_option("--kind", ut_kind, "quadratic, zero_one or volatility_threshold")->capture_default_str();
    utility->add_option("--threshold", ut_threshold, "Price-sd threshold for volatility_threshold");
    utility->add_option("--sell-probability", ut_sell)->capture_default_str();

    // baselines ---------------------------------------------------------------
    auto* baselines = app.add_subcommand("baselines", "Sample-means and bootstrap calibrations on one window");
    std::string bl_input, bl_end, bl_kind = "call";
    std::size_t bl_window = 252, bl_replicates = 5000;
    double bl_strike = 0.0, bl_rate = 0.0;
    int bl_periods = 0;
    baselines->add_option("--input", bl_input, "Price series CSV")->required();
    baselines->add_option("--window", bl_window, "Returns per window")->capture_default_str();
    baselines->add_option("--end-date", bl_end, "Last date of the window (default: last row)");
    baselines->add_option("--strike", bl_strike, "Strike")->required();
    baselines->add_option("--periods", bl_periods, "Tree steps to maturity")->required();
    baselines->add_option("--rate", bl_rate, "Annualized risk-free rate when the series has none")->capture_default_str();
    baselines->add_option("--kind", bl_kind, "call or put")->capture_default_str();
    baselines->add_option("--replicates", bl_replicates, "Bootstrap replicates")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const fs::path out(out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (!fs::is_directory(out)) throw validation_error("cannot create output directory '" + out_dir + "'");

        if (*calibrate) {
            const auto series = load_series(cal_input);
            const auto [t, returns] = window_returns(series, cal_window, cal_end, cal_rate);
            const auto prior = PriorConfig::defaults_for(returns, cal_mcmc.u_upper);
            const Chain chain = run_chain(returns, prior, cal_mcmc.chain_config(seed));
            {
                auto f = open_output(out / "chain.csv");
                write_chain_csv(f, chain);
            }
            nlohmann::json j = to_json(chain_diagnostics(chain, std::min(cal_lag, chain.samples.size() - 1)));
            j["window_end"] = series.dates[t].str();
            j["r_f"] = returns.r_f;
            j["samples"] = chain.samples.size();
            j["tuning"] = {{"blocks", chain.tuning.blocks}, {"converged", chain.tuning.converged}};
            for (Param p : metropolis_params)
                j["proposal_variance"][std::string(to_string(p))] = chain.proposal_variances[index_of(p)];
            j["prior"] = {{"a", prior.a},           {"b", prior.b},           {"alpha_u", prior.alpha_u},
                          {"beta_u", prior.beta_u}, {"alpha_d", prior.alpha_d}, {"beta_d", prior.beta_d},
                          {"u_upper", prior.u_upper}};
            write_json(out / "diagnostics.json", j);
            if (!chain.tuning.converged)
                std::cerr << "warning: proposal tuning did not settle within " << cal_mcmc.tuner_blocks << " blocks\n";
        } else if (*price) {
            std::ifstream in(pr_chain);
            if (!in) throw validation_error("cannot open chain file '" + pr_chain + "'");
            const Chain chain = read_chain_csv(in, pr_chain);
            const MarketFrame frame{pr_spot, pr_strike, pr_periods, per_period_rate(pr_rate), parse_kind(pr_kind)};
            frame.validate();
            for (Method m : parse_methods(pr_methods)) {
                const RandomStream root(combine_seed(seed, 1 + static_cast<std::uint64_t>(m)));
                PriceDistribution dist;
                if (m == Method::theta) {
                    dist = theta_method(chain, frame, pr_prop.theta(workers), root);
                } else if (m == Method::xi) {
                    auto result = xi_method(chain, frame, pr_prop.xi(workers), root);
                    auto f = open_output(out / "xi_grid.csv");
                    f << "u,d,mass\n";
                    for (std::size_t k = 0; k < result.grid.bin_centers.size(); ++k)
                        f << csv::format_double(result.grid.bin_centers[k].u) << ','
                          << csv::format_double(result.grid.bin_centers[k].d) << ','
                          << csv::format_double(result.grid.masses[k]) << '\n';
                    dist = std::move(result.prices);
                } else if (m == Method::expected_xi) {
                    dist = expected_xi_method(chain, frame, pr_prop.expected(workers), root);
                } else {
                    throw validation_error("price: baselines need returns; use the baselines subcommand");
                }
                const std::vector<double> levels{0.005, 0.025, 0.25, 0.5, 0.75, 0.975, 0.995};
                write_distribution(out, std::string(to_string(m)), dist, summarize(dist, levels));
            }
        } else if (*roll) {
            const auto series = load_series(ro_input);
            RunConfig config;
            config.window = ro_window;
            config.strike = ro_strike;
            config.maturity = Date::parse(ro_maturity);
            if (!ro_first.empty()) config.first_date = Date::parse(ro_first);
            config.methods = parse_methods(ro_methods);
            config.kind = parse_kind(ro_kind);
            config.annual_rate = ro_rate;
            config.u_upper = ro_mcmc.u_upper;
            config.mcmc = ro_mcmc.chain_config(0);
            config.theta = ro_prop.theta(1);
            config.xi = ro_prop.xi(1);
            config.expected_xi = ro_prop.expected(1);
            config.bootstrap = {ro_prop.replicates, 1};
            config.seed = seed;
            config.workers = workers;
            config.keep_samples = ro_keep;
            const auto report = rolling_run(series, config);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            emit_report(report, out);
        } else if (*utility) {
            UtilitySpec spec;
            spec.kind = utility_kind_from_string(ut_kind);
            spec.threshold = ut_threshold;
            spec.sell_probability = ut_sell;
            spec.validate();
            const auto model = ScalarPriceModel::from_density_grid(
                atm_unit_call, [&](double t) { return gamma_pdf(t, ut_shape, ut_rate); }, 0.0, ut_theta_max,
                ut_prior_points);
            const auto grid = linspace(ut_qmin, ut_qmax, ut_quote_points);
            const auto decision = optimal_quote(model, spec, grid);
            {
                auto f = open_output(out / "utility_curve.csv");
                f << "quote,expected_utility\n";
                for (const auto& [q, eu] : decision.curve)
                    f << csv::format_double(q) << ',' << csv::format_double(eu) << '\n';
            }
            const double prior_mean = ut_shape / ut_rate;
            const double prior_mode = ut_shape >= 1.0 ? (ut_shape - 1.0) / ut_rate : 0.0;
            nlohmann::json j{{"optimal_quote", decision.quote},
                             {"expected_utility", decision.utility},
                             {"price_at_prior_mean", atm_unit_call(prior_mean)},
                             {"price_at_prior_mode", atm_unit_call(prior_mode)},
                             {"prior_mean_of_price", model.price_mean()}};
            write_json(out / "utility.json", j);
            std::cout << j.dump(2) << '\n';
        } else if (*baselines) {
            const auto series = load_series(bl_input);
            const auto [t, returns] = window_returns(series, bl_window, bl_end, bl_rate);
            const MarketFrame frame{series.closes[t], bl_strike, bl_periods, returns.r_f, parse_kind(bl_kind)};
            const BootstrapConfig cfg{bl_replicates, workers};
            const std::vector<double> levels{0.005, 0.5, 0.995};
            const PriceDistribution sm{{sample_means_calibration(returns, frame)}, Method::sm};
            write_distribution(out, "sm", sm, summarize(sm, levels));
            auto root = [&](Method m) { return RandomStream(combine_seed(seed, 1 + static_cast<std::uint64_t>(m))); };
            const auto bm = bootstrapped_means(returns, frame, cfg, root(Method::bm));
            write_distribution(out, "bm", bm, summarize(bm, levels));
            const auto bv = bootstrapped_values(returns, frame, cfg, root(Method::bv));
            write_distribution(out, "bv", bv, summarize(bv, levels));
        }
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
