// xlim: command-line front end.
//
//   xlim simulate --config sim.json --seed 7 --out run/
//   xlim subtract --config onoff.json --out run/
//   xlim fit      --config fit.json --out run/
//   xlim limit    --kind csl --config csl.json --cl 0.95 --data-dir run/ --out run/
//   xlim project  --config budget.json
//   xlim constants

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xlim/config.hpp"
#include "xlim/run.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> cl;
    std::string out = ".";
    std::optional<std::string> kind;
    std::optional<std::string> data_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* c = cmd->add_option("--config", args.config, "Run configuration (JSON)");
    if (config_required) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Top-level random seed (overrides the config)");
    cmd->add_option("--cl", args.cl, "Confidence level in (0, 1) (overrides the config)");
    cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
    cmd->add_option("--data-dir", args.data_dir,
                    "Directory for relative input paths (default: the config file's directory)");
}

int run(const std::string& command, const CommonArgs& args) {
    xlim::ConfigOverrides overrides{args.seed, args.cl, args.kind};
    auto config = args.config.empty() ? xlim::resolve_config(nlohmann::json::object(), ".", overrides)
                                      : xlim::load_run_config(args.config, overrides);
    if (args.data_dir) config.base_dir = *args.data_dir;
    const auto output = xlim::run_command(command, config);
    xlim::write_outputs(args.out, output);
    std::cout << output.report_text();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"xlim: X-ray spectrum forward modelling and upper limits for underground rare-event searches"};
    app.require_subcommand(1);

    CommonArgs args;
    const struct {
        const char* name;
        const char* help;
        bool needs_config;
    } commands[] = {
        {"simulate", "Draw a Poisson spectrum from a model", true},
        {"subtract", "Time-normalized current-on minus current-off residual", true},
        {"fit", "Fit a spectral model to a spectrum", true},
        {"limit", "Bayesian upper limit (--kind csl | pep | signal)", true},
        {"project", "Sensitivity budget (improvement factors)", true},
        {"constants", "Dump the physical constants table", false},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, args, c.needs_config);
        if (std::string(c.name) == "limit") {
            sub->add_option("--kind", args.kind, "Limit kind")->check(CLI::IsMember({"csl", "pep", "signal"}));
        }
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, args);
    } catch (const xlim::StageError& e) {
        std::cerr << "xlim " << command << ": error " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "xlim " << command << ": error [config] " << e.what() << '\n';
        return 1;
    }
}
