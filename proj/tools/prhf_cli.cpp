// prhf: pseudorelativistic Hartree-Fock solver and regularity lab.
// Subcommands: solve | regularity | verify | ledger | all.
// Exit codes: 0 all checks pass, 1 numerical contract failure,
//             2 precondition refusal, 3 I/O error.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "prhf/prhf.hpp"

namespace {

std::set<prhf::Phase> phases_for(const std::string& sub) {
    using prhf::Phase;
    if (sub == "solve") return {Phase::Solve};
    if (sub == "regularity") return {Phase::Regularity};
    if (sub == "verify") return {Phase::Verify};
    if (sub == "ledger") return {Phase::Ledger};
    return {Phase::Solve, Phase::Ledger, Phase::Regularity, Phase::Audit, Phase::Verify};
}

int run_sub(const std::string& sub, const std::string& config_path, bool force) {
    prhf::RunConfig cfg;
    if (!config_path.empty()) cfg = prhf::parse_config(config_path);
    if (cfg.physics().unstable() && !force) {
        std::cerr << "refused: Z*alpha = " << cfg.Z * cfg.alpha
                  << " >= 2/pi; pass --force to proceed\n";
        return 2;
    }
    prhf::RunManifest man = prhf::run(cfg, phases_for(sub), force);
    for (const auto& f : man.failures) std::cerr << "contract failure: " << f << "\n";
    std::cout << "outputs in " << man.directory << " (" << man.outputs.size() << " files)\n";
    return man.contracts_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudorelativistic Hartree-Fock solver + regularity lab"};
    app.require_subcommand(0, 1);

    std::string config_path;
    bool force = false;
    bool print_defaults = false;
    app.add_option("--config", config_path, "configuration file (section.key = value lines)");
    app.add_flag("--force", force, "proceed even when Z*alpha >= 2/pi");
    app.add_flag("--print-defaults", print_defaults, "print the default configuration and exit");

    std::vector<std::string> subs = {"solve", "regularity", "verify", "ledger", "all"};
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s);
        sub->add_option("--config", config_path, "configuration file");
        sub->add_flag("--force", force, "proceed even when Z*alpha >= 2/pi");
    }

    CLI11_PARSE(app, argc, argv);

    if (print_defaults) {
        std::cout << prhf::RunConfig{}.echo();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cout << app.help();
        return 0;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    if (const char* threads = std::getenv("PRHF_THREADS"); threads != nullptr) {
        // advisory parallelism width; the pipeline is single-threaded for
        // byte-reproducibility, the setting is recorded for bookkeeping
        std::cerr << "note: PRHF_THREADS=" << threads
                  << " recorded; compute pipeline runs single-threaded\n";
    }
    try {
        return run_sub(sub, config_path, force);
    } catch (const prhf::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const prhf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const prhf::PreconditionError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
