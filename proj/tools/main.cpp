// bip: provisioning engine and capacity-analysis toolkit for non-colliding
// identity embeddings on the unit hypersphere.

#include "commands.hpp"

#include "bip/errors.hpp"
#include "bip/types.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"bip: identity-embedding provisioning and capacity analysis"};
    app.require_subcommand(1);

    int threads = 0;
    if (const char* env = std::getenv("BIP_THREADS")) {
        threads = std::atoi(env);
    }
    app.add_option("--threads", threads, "worker threads (default: all cores; env BIP_THREADS)");

    // synth
    std::string synth_config, synth_out;
    auto* synth = app.add_subcommand("synth", "sample a synthetic vMF-mixture gallery");
    synth->add_option("--config", synth_config, "synth config JSON")->required();
    synth->add_option("--out,-o", synth_out, "output prefix")->required();

    // gallery-stats
    std::string gs_gallery, gs_out;
    auto* gstats = app.add_subcommand("gallery-stats", "audit an embedding gallery file");
    gstats->add_option("--gallery", gs_gallery, "gallery .bipe file")->required();
    gstats->add_option("--out,-o", gs_out, "output prefix (optional)");

    // pca
    std::string pca_gallery, pca_out;
    bool pca_origin = false;
    auto* pca = app.add_subcommand("pca", "fit the centroid-cloud spectrum");
    pca->add_option("--gallery", pca_gallery, "gallery .bipe file")->required();
    pca->add_option("--out,-o", pca_out, "output prefix")->required();
    pca->add_flag("--origin-centered", pca_origin, "second moments about the origin, not the mean");

    // capacity
    std::vector<double> cap_taus;
    int cap_dim = 269;
    double cap_delta = 0.0;
    std::string cap_out;
    auto* capacity = app.add_subcommand("capacity", "cap volumes, packing bounds and alpha*");
    capacity->add_option("--tau", cap_taus, "thresholds (comma separated)")
        ->required()
        ->delimiter(',');
    capacity->add_option("--dim", cap_dim, "sphere dimension");
    capacity->add_option("--delta", cap_delta, "safety buffer width (adds buffer reports)");
    capacity->add_option("--out,-o", cap_out, "output prefix")->required();

    // provision
    std::string prov_gallery, prov_config, prov_out;
    long long prov_n = 0;
    auto* prov = app.add_subcommand("provision", "allocate non-colliding virtual embeddings");
    prov->add_option("--gallery", prov_gallery, "gallery .bipe file")->required();
    prov->add_option("--config", prov_config, "allocation config JSON")->required();
    prov->add_option("--n", prov_n, "number of identities to provision")->required();
    prov->add_option("--out,-o", prov_out, "output prefix")->required();

    // verify
    std::string ver_virtual, ver_gallery, ver_out;
    double ver_tau = 0.391;
    auto* verify = app.add_subcommand("verify", "exact non-collision / inter-sep check");
    verify->add_option("--virtual", ver_virtual, "virtual set .bipe file")->required();
    verify->add_option("--gallery", ver_gallery, "gallery .bipe file")->required();
    verify->add_option("--tau", ver_tau, "verification threshold")->required();
    verify->add_option("--out,-o", ver_out, "output prefix (optional)");

    // stress-test
    std::string st_virtual, st_heldout, st_out;
    double st_tau = 0.391;
    std::vector<double> st_fractions{0.1, 0.2, 0.3, 0.4, 0.5};
    auto* stress = app.add_subcommand("stress-test", "collision rate against held-out galleries");
    stress->add_option("--virtual", st_virtual, "virtual set .bipe file")->required();
    stress->add_option("--heldout", st_heldout, "held-out gallery .bipe file")->required();
    stress->add_option("--tau", st_tau, "verification threshold")->required();
    stress->add_option("--fractions", st_fractions, "held-out prefix fractions")->delimiter(',');
    stress->add_option("--out,-o", st_out, "output prefix")->required();

    // revoke-check
    std::string rc_virtual, rc_delta, rc_out;
    double rc_tau = 0.391, rc_tau_safe = 0.0;
    auto* revoke = app.add_subcommand("revoke-check", "revocations against newly enrolled rows");
    revoke->add_option("--virtual", rc_virtual, "virtual set .bipe file")->required();
    revoke->add_option("--delta", rc_delta, "newly enrolled gallery .bipe file")->required();
    revoke->add_option("--tau", rc_tau, "verification threshold")->required();
    revoke->add_option("--tau-safe", rc_tau_safe, "monitoring-zone lower edge (optional)");
    revoke->add_option("--out,-o", rc_out, "output prefix")->required();

    // pairs
    std::string pr_a, pr_b, pr_list, pr_mode = "rr", pr_out;
    double pr_tar = 0.95, pr_threshold = -3.0;
    auto* pairs = app.add_subcommand("pairs", "pair-verification protocols");
    pairs->add_option("--a", pr_a, "embeddings for the pair's first index")->required();
    pairs->add_option("--b", pr_b, "embeddings for the pair's second index")->required();
    pairs->add_option("--pairs", pr_list, "pair list CSV")->required();
    pairs->add_option("--mode", pr_mode, "protocol: rr, vv or rv");
    pairs->add_option("--tar", pr_tar, "target TAR for calibration");
    pairs->add_option("--threshold", pr_threshold, "fixed threshold (skips calibration)");
    pairs->add_option("--out,-o", pr_out, "output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return bip::cli::kExitInputError;
    }

    bip::set_num_threads(threads);

    try {
        if (synth->parsed()) return bip::cli::cmd_synth(synth_config, synth_out);
        if (gstats->parsed()) return bip::cli::cmd_gallery_stats(gs_gallery, gs_out);
        if (pca->parsed()) return bip::cli::cmd_pca(pca_gallery, pca_out, pca_origin);
        if (capacity->parsed()) return bip::cli::cmd_capacity(cap_taus, cap_dim, cap_delta, cap_out);
        if (prov->parsed()) return bip::cli::cmd_provision(prov_gallery, prov_config, prov_n, prov_out);
        if (verify->parsed()) return bip::cli::cmd_verify(ver_virtual, ver_gallery, ver_tau, ver_out);
        if (stress->parsed()) return bip::cli::cmd_stress(st_virtual, st_heldout, st_tau, st_fractions, st_out);
        if (revoke->parsed()) {
            return bip::cli::cmd_revoke_check(rc_virtual, rc_delta, rc_tau, rc_tau_safe, rc_out);
        }
        if (pairs->parsed()) {
            return bip::cli::cmd_pairs(pr_a, pr_b, pr_list, pr_mode, pr_tar, pr_threshold, pr_out);
        }
    } catch (const bip::FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return bip::cli::kExitInputError;
    } catch (const bip::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return bip::cli::kExitInputError;
    } catch (const bip::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bip::cli::kExitInternalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bip::cli::kExitInternalError;
    }
    return bip::cli::kExitInternalError;
}
