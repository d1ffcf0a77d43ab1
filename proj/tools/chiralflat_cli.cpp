// Command-line surface for the chiral flat-band toolkit: magic-angle scans,
// exact and numeric traces, band structures, wavefunction dumps, Berry
// curvature / Chern computations and theta-interpolation sweeps. Every
// subcommand is reproducible from its RunConfig; outputs are plain JSON/CSV.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "chiralflat/bands.hpp"
#include "chiralflat/chern.hpp"
#include "chiralflat/io.hpp"
#include "chiralflat/parallel.hpp"
#include "chiralflat/theta.hpp"

using namespace chiralflat;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string potential{"u1"};
    int N{16};
    std::string outdir{"out"};
    bool no_cache{false};
    unsigned threads{0};
    std::uint64_t seed{12345};
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--potential", c.potential, "u1 | u2 | inline JSON | path to JSON file");
    cmd->add_option("--N", c.N, "truncation radius");
    cmd->add_option("--out", c.outdir, "output directory");
    cmd->add_flag("--no-cache", c.no_cache, "disable the result cache");
    cmd->add_option("--threads", c.threads, "worker pool bound (0 = hardware)");
    cmd->add_option("--seed", c.seed, "seed for randomized checks");
}

fs::path cache_dir(const CommonOpts& c) {
    if (const char* env = std::getenv("CHIRALFLAT_CACHE_DIR")) return fs::path(env);
    return fs::path(c.outdir) / ".cache";
}

json potential_json_of(const std::string& spec) {
    if (spec == "u1" || spec == "u2") return json(spec);
    if (!spec.empty() && spec.front() == '{') return json::parse(spec);
    std::ifstream in(spec);
    json j;
    in >> j;
    return j;
}

json config_json(const std::string& cmd, const CommonOpts& c, json extra) {
    json j{{"command", cmd},
           {"potential", potential_json_of(c.potential)},
           {"N", c.N},
           {"seed", c.seed}};
    j.update(extra);
    return j;
}

int run_magic(const CommonOpts& c, const std::string& window, double mu_floor) {
    RunConfig cfg = RunConfig::from_json(
        config_json("magic", c, {{"window", window}, {"eig_floor", mu_floor}}));
    Cache cache(cache_dir(c), !c.no_cache);
    json result;
    if (auto hit = cache.load(cfg)) {
        result = *hit;
    } else {
        FourierPotential pot = potential_from_spec(c.potential);
        SpectralOptions opt;
        opt.eig_floor = mu_floor;
        const BlockSpectrum bs = BlockSpectrum::compute(pot, TruncationParams{c.N});
        auto angles = magic_angles(pot, TruncationParams{c.N},
                                   window == "real" ? Window::real_axis : Window::complex_plane,
                                   opt, &bs);
        json list = json::array();
        for (const auto& a : angles) {
            MagicAngle ma = classify(pot, a.alpha, TruncationParams{c.N}, opt, &bs);
            list.push_back(to_json(ma));
        }
        result = json{{"angles", list}, {"count", list.size()}};
        cache.store(cfg, result);
    }
    const fs::path out = fs::path(c.outdir) / "magic.json";
    write_text(out, json{{"config", cfg.data}, {"result", result}}.dump(2) + "\n");
    std::cout << result.dump(2) << "\n";
    return 0;
}

int run_trace(const CommonOpts& c, int ell, const std::string& subspace, bool exact_rem,
              bool criterion, const std::vector<int>& schedule) {
    RunConfig cfg = RunConfig::from_json(config_json(
        "trace", c,
        {{"ell", ell}, {"subspace", subspace}, {"exact", exact_rem}, {"criterion", criterion},
         {"schedule", schedule}}));
    Cache cache(cache_dir(c), !c.no_cache);
    json result;
    if (auto hit = cache.load(cfg)) {
        result = *hit;
    } else {
        FourierPotential pot = potential_from_spec(c.potential);
        result = json::object();
        if (exact_rem) {
            json R = json::array();
            for (int j = 0; j < 3; ++j) R.push_back(exact_remainder(pot, ell, j).str());
            result["exact_remainders"] = R;
        }
        if (criterion) {
            auto full = nonreal_criterion(pot, kFullSpace, schedule);
            auto sub2 = nonreal_criterion(pot, 2, schedule);
            result["criterion"] = json{
                {"full", {{"holds", full.holds}, {"lhs", full.lhs}, {"rhs", full.rhs}}},
                {"subspace2", {{"holds", sub2.holds}, {"lhs", sub2.lhs}, {"rhs", sub2.rhs}}}};
        }
        if (!exact_rem && !criterion) {
            const int sub = subspace == "full" ? kFullSpace : std::stoi(subspace);
            TraceResult t = (sub != kFullSpace && pot.all_exact())
                                ? subspace_trace(pot, ell, sub, schedule)
                                : numeric_trace(pot, ell, sub, schedule);
            result["trace"] = to_json(t);
        }
        cache.store(cfg, result);
    }
    write_text(fs::path(c.outdir) / "trace.json",
               json{{"config", cfg.data}, {"result", result}}.dump(2) + "\n");
    std::cout << result.dump(2) << "\n";
    return 0;
}

int run_bands(const CommonOpts& c, double alpha_re, double alpha_im,
              const std::string& path_spec, int per_segment, int nbands) {
    RunConfig cfg = RunConfig::from_json(config_json(
        "bands", c,
        {{"alpha", {alpha_re, alpha_im}}, {"path", path_spec}, {"per_segment", per_segment},
         {"nbands", nbands}}));
    Cache cache(cache_dir(c), !c.no_cache);
    FourierPotential pot = potential_from_spec(c.potential);
    const Complex alpha(alpha_re, alpha_im);
    std::vector<std::string> names;
    {
        std::stringstream ss(path_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) names.push_back(tok);
    }
    const auto ks = k_path(names, per_segment);
    std::vector<Eigen::VectorXd> rows(ks.size());
    parallel_for(ks.size(), [&](std::size_t i) {
        rows[i] = bands_at(pot, alpha, ks[i], TruncationParams{c.N}, nbands);
    }, c.threads);
    std::ostringstream csv;
    csv << "k_re,k_im";
    for (int b = 1; b <= nbands; ++b) csv << ",E_" << b;
    csv << "\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        csv << fmt(ks[i].real()) << "," << fmt(ks[i].imag());
        for (int b = 0; b < nbands; ++b) csv << "," << fmt(rows[i](b));
        csv << "\n";
    }
    write_text(fs::path(c.outdir) / "bands.csv", csv.str());
    write_text(fs::path(c.outdir) / "bands.config.json", cfg.data.dump(2) + "\n");
    std::cout << "wrote " << (fs::path(c.outdir) / "bands.csv").string() << "\n";
    return 0;
}

int run_wavefunction(const CommonOpts& c, double alpha_re, double alpha_im, double k_re,
                     double k_im, int M) {
    RunConfig cfg = RunConfig::from_json(config_json(
        "wavefunction", c,
        {{"alpha", {alpha_re, alpha_im}}, {"k", {k_re, k_im}}, {"M", M}}));
    FourierPotential pot = potential_from_spec(c.potential);
    SectorPair sp(TruncationParams{c.N});
    auto kers = kernel_basis(pot, Complex(alpha_re, alpha_im), Complex(k_re, k_im),
                             TruncationParams{c.N});
    int idx = 0;
    for (const auto& kv : kers) {
        SpinorField f = sample_spinor(kv.coeffs, sp, M);
        std::ostringstream csv;
        csv << "z_re,z_im,abs_u1,abs_u2,arg_u1,arg_u2\n";
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                const Complex z = f.z_at(i, j);
                const Complex u1 = f.comp1[std::size_t(i) * M + j];
                const Complex u2 = f.comp2[std::size_t(i) * M + j];
                csv << fmt(z.real()) << "," << fmt(z.imag()) << "," << fmt(std::abs(u1)) << ","
                    << fmt(std::abs(u2)) << "," << fmt(std::arg(u1)) << "," << fmt(std::arg(u2))
                    << "\n";
            }
        write_text(fs::path(c.outdir) / ("wavefunction_" + std::to_string(idx) + ".csv"),
                   csv.str());
        ++idx;
    }
    write_text(fs::path(c.outdir) / "wavefunction.config.json", cfg.data.dump(2) + "\n");
    std::cout << "wrote " << idx << " kernel vector dump(s)\n";
    return 0;
}

int run_chern(const CommonOpts& c, double alpha_re, double alpha_im, int grid,
              const std::string& frame, int M) {
    RunConfig cfg = RunConfig::from_json(config_json(
        "chern", c,
        {{"alpha", {alpha_re, alpha_im}}, {"grid", grid}, {"frame", frame}, {"M", M}}));
    Cache cache(cache_dir(c), !c.no_cache);
    json result;
    if (auto hit = cache.load(cfg)) {
        result = *hit;
    } else {
        FourierPotential pot = potential_from_spec(c.potential);
        const Complex alpha(alpha_re, alpha_im);
        ThetaFrame fr(pot, alpha, TruncationParams{c.N}, M);
        int c1;
        if (frame == "numeric")
            c1 = chern_plaquette_numeric(pot, alpha, TruncationParams{c.N}, grid, fr.rank());
        else
            c1 = chern_plaquette(fr, grid);
        const auto bi = boundary_integral_c1(fr);
        result = json{{"c1", c1},
                      {"boundary", bi.boundary_term},
                      {"puncture", bi.puncture_term},
                      {"total", bi.total},
                      {"rank", fr.rank()}};
        // curvature field CSV
        CurvatureField cf = curvature_field(fr, grid);
        std::ostringstream csv;
        csv << "k_re,k_im,H\n";
        for (std::size_t i = 0; i < cf.k.size(); ++i)
            csv << fmt(cf.k[i].real()) << "," << fmt(cf.k[i].imag()) << "," << fmt(cf.H[i])
                << "\n";
        write_text(fs::path(c.outdir) / "curvature.csv", csv.str());
        // k_x = 0 cross-section (closest unmasked column), as in the paper's
        // cross-section plots
        std::ostringstream cs;
        cs << "k_im,H\n";
        for (std::size_t i = 0; i < cf.k.size(); ++i)
            if (std::abs(cf.k[i].real()) < 0.5 * std::abs(lat::q1) / grid)
                cs << fmt(cf.k[i].imag()) << "," << fmt(cf.H[i]) << "\n";
        write_text(fs::path(c.outdir) / "curvature_section.csv", cs.str());
        cache.store(cfg, result);
    }
    write_text(fs::path(c.outdir) / "chern.json",
               json{{"config", cfg.data}, {"result", result}}.dump(2) + "\n");
    std::cout << result.dump(2) << "\n";
    return 0;
}

int run_sweep(const CommonOpts& c, int steps, int N_sweep) {
    RunConfig cfg = RunConfig::from_json(
        config_json("sweep", c, {{"steps", steps}, {"N_sweep", N_sweep}}));
    Cache cache(cache_dir(c), !c.no_cache);
    const fs::path ckdir = cache.dir() / ("sweep_" + cfg.hash_hex());
    fs::create_directories(ckdir);
    json rows = json::array();
    for (int s = 0; s < steps; ++s) {
        const double theta = 2.0 * M_PI * s / steps;
        const fs::path ck = ckdir / ("theta_" + std::to_string(s) + ".json");
        json row;
        if (fs::exists(ck)) {
            std::ifstream in(ck);
            in >> row;  // long sweeps resume from the last completed step
        } else {
            FourierPotential pot = build_interpolated(theta);
            auto tr = theta_sweep({theta}, {10, 14}).front();
            SpectralOptions opt;
            opt.stability_check = false;
            auto angles =
                magic_angles(pot, TruncationParams{N_sweep}, Window::complex_plane, opt);
            json alist = json::array();
            for (const auto& a : angles) {
                json e = json{{"alpha_re", a.alpha.real()},
                              {"alpha_im", a.alpha.imag()},
                              {"subspace", a.subspace}};
                alist.push_back(e);
            }
            row = json{{"theta", theta},
                       {"tr2_sub", {tr.tr_sub[0], tr.tr_sub[1], tr.tr_sub[2]}},
                       {"tr2_full", tr.tr_full},
                       {"angles", alist}};
            std::ofstream out(ck);
            out << row.dump(2) << "\n";
        }
        rows.push_back(row);
    }
    json result{{"rows", rows}};
    write_text(fs::path(c.outdir) / "sweep.json",
               json{{"config", cfg.data}, {"result", result}}.dump(2) + "\n");
    std::cout << "sweep complete: " << steps << " steps\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    // task-level parallelism only: keep any BLAS backend single-threaded so
    // reruns are bit-identical
    setenv("OPENBLAS_NUM_THREADS", "1", 0);
    setenv("OMP_NUM_THREADS", "1", 0);

    CLI::App app{"chiral flat-band toolkit (magic angles, traces, bands, topology)"};
    app.require_subcommand(1);

    CommonOpts c;

    auto* magic = app.add_subcommand("magic", "scan for magic angles");
    CommonOpts cm = c;
    add_common(magic, cm);
    std::string window = "real";
    double mu_floor = 0.02;
    magic->add_option("--window", window, "real | complex");
    magic->add_option("--eig-floor", mu_floor, "modulus floor on A_0 eigenvalues");

    auto* trace = app.add_subcommand("trace", "numeric and exact traces of A_0 powers");
    CommonOpts ct = c;
    add_common(trace, ct);
    int ell = 2;
    std::string subspace = "full";
    bool exact_rem = false, criterion = false;
    std::vector<int> schedule{12, 16, 20};
    trace->add_option("--ell", ell, "power of A_0 (2..6)");
    trace->add_option("--subspace", subspace, "0|1|2|full");
    trace->add_flag("--exact-remainder", exact_rem, "emit exact R_{l,j} strings");
    trace->add_flag("--criterion", criterion, "evaluate the non-real criterion");
    trace->add_option("--schedule", schedule, "truncation schedule")->expected(-1);

    auto* bands = app.add_subcommand("bands", "Bloch bands along a waypoint path");
    CommonOpts cb = c;
    add_common(bands, cb);
    double are = 0.5, aim = 0.0, kre = 0.0, kim = 0.0;
    std::string path_spec = "Gamma,K,M,Gamma";
    int per_segment = 24, nbands = 6;
    bands->add_option("--alpha", are, "coupling (real part)");
    bands->add_option("--alpha-im", aim, "coupling (imaginary part)");
    bands->add_option("--path", path_spec, "comma list of Gamma,K,Kp,M");
    bands->add_option("--per-segment", per_segment, "samples per path segment");
    bands->add_option("--nbands", nbands, "number of bands to emit");

    auto* wf = app.add_subcommand("wavefunction", "flat-band wavefunction sample dumps");
    CommonOpts cw = c;
    add_common(wf, cw);
    double wa = 0.5856, wai = 0.0;
    int M = 256;
    wf->add_option("--alpha", wa, "coupling (real part)");
    wf->add_option("--alpha-im", wai, "coupling (imaginary part)");
    wf->add_option("--k", kre, "momentum (real part)");
    wf->add_option("--k-im", kim, "momentum (imaginary part)");
    wf->add_option("--M", M, "real-space grid size");

    auto* chern = app.add_subcommand("chern", "Berry curvature and Chern number");
    CommonOpts cc = c;
    add_common(chern, cc);
    double ca = 0.8538, cai = 0.0;
    int grid = 24, Mg = 64;
    std::string frame = "theta";
    chern->add_option("--alpha", ca, "coupling (real part)");
    chern->add_option("--alpha-im", cai, "coupling (imaginary part)");
    chern->add_option("--grid", grid, "plaquette grid size");
    chern->add_option("--frame", frame, "theta | numeric");
    chern->add_option("--M", Mg, "real-space quadrature grid");

    auto* sweep = app.add_subcommand("sweep", "theta-interpolation sweep with checkpoints");
    CommonOpts cs = c;
    add_common(sweep, cs);
    int steps = 64, N_sweep = 12;
    sweep->add_option("--steps", steps, "number of theta samples in [0, 2 pi)");
    sweep->add_option("--N-sweep", N_sweep, "truncation for the per-theta scans");

    CLI11_PARSE(app, argc, argv);

    try {
        if (magic->parsed()) return run_magic(cm, window, mu_floor);
        if (trace->parsed()) return run_trace(ct, ell, subspace, exact_rem, criterion, schedule);
        if (bands->parsed()) return run_bands(cb, are, aim, path_spec, per_segment, nbands);
        if (wf->parsed()) return run_wavefunction(cw, wa, wai, kre, kim, M);
        if (chern->parsed()) return run_chern(cc, ca, cai, grid, frame, Mg);
        if (sweep->parsed()) return run_sweep(cs, steps, N_sweep);
    } catch (const error& e) {
        json err{{"error", e.what()}, {"type", "chiralflat"}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}, {"type", "internal"}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
    return 1;
}
