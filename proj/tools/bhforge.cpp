// Command-line front end: sieve, finite, shells, verify, clean, density,
// badscan, visible, separation.

#include "bhforge/bhforge.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

using namespace bhforge;

namespace {

struct Common {
    int threads = 1;
    std::uint64_t seed = 0;
    std::uint64_t budget = kDefaultEnumerationBudget;
    std::int64_t precision_cap = kDefaultPrecisionCap;
    std::uint64_t sieve_cap = kDefaultSieveCap;
};

PrecisionPolicy policy_of(const Common& c) {
    PrecisionPolicy p;
    p.cap_bits = c.precision_cap;
    return p;
}

Json common_json(const Common& c) {
    return {{"threads", c.threads}, {"seed", c.seed}, {"budget", c.budget}, {"precision_cap", c.precision_cap},
            {"sieve_cap", c.sieve_cap}};
}

/// stdout unless a path is given.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw PreconditionViolation("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

SequenceDump load_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionViolation("cannot open input file " + path);
    return read_sequence_dump(in);
}

Shells group_by_shell(const std::vector<EncodedElement>& elements) {
    Shells s;
    for (const auto& e : elements) s[e.K].push_back(e);
    return s;
}

std::vector<BigInt> b_values(const std::vector<EncodedElement>& elements) {
    std::vector<BigInt> v;
    for (const auto& e : elements) v.push_back(e.b);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dense B_h sequences from arguments of Gaussian primes"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Common common;
    if (const char* env = std::getenv("BH_FORGE_PRECISION_CAP")) common.precision_cap = std::atoll(env);
    app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", common.seed, "Seed for randomized commands");
    app.add_option("--budget", common.budget, "Enumeration budget for collision searches");
    app.add_option("--precision-cap", common.precision_cap, "Precision cap in bits")->check(CLI::PositiveNumber);
    app.add_option("--sieve-cap", common.sieve_cap, "Largest norm the sieve may reach");

    int h = 2;
    std::string alpha_s = "1/1";
    std::string out_path;
    std::string in_path;

    auto* sieve = app.add_subcommand("sieve", "List first-octant Gaussian primes by norm");
    std::uint64_t max_norm = 100;
    sieve->add_option("--max-norm", max_norm, "Largest norm")->required();
    sieve->add_option("--out", out_path, "Output file (JSON lines)");

    auto* finite = app.add_subcommand("finite", "Build the finite B_h set for a given x");
    std::uint64_t x = 0;
    bool verify_flag = false;
    finite->add_option("--h", h, "h in 2..4")->required();
    finite->add_option("--x", x, "Upper end of the interval")->required();
    finite->add_flag("--verify", verify_flag, "Search for repeated h-fold sums");
    finite->add_option("--out", out_path, "Output file (JSON)");

    auto* shells = app.add_subcommand("shells", "Encode shells and write a sequence dump");
    int k_min = -1, k_max = 8;
    shells->add_option("--h", h, "h in 2..4")->required();
    shells->add_option("--alpha", alpha_s, "alpha as num/den in [1, 2]");
    shells->add_option("--k-min", k_min, "First shell (default h+1)");
    shells->add_option("--k-max", k_max, "Last shell");
    shells->add_option("--out", out_path, "Output file (JSON lines)");

    auto* verify = app.add_subcommand("verify", "Find repeated sums in a sequence dump");
    bool certify_flag = false;
    verify->add_option("--in", in_path, "Sequence dump")->required();
    verify->add_flag("--certify", certify_flag, "Attach a certificate to each collision");
    verify->add_option("--out", out_path, "Output file (JSON lines)");

    auto* clean = app.add_subcommand("clean", "Remove the largest element of every repeated sum");
    clean->add_option("--in", in_path, "Sequence dump")->required();
    clean->add_option("--out", out_path, "Cleaned dump");

    auto* density = app.add_subcommand("density", "Counting exponent of a (cleaned) sequence");
    density->add_option("--in", in_path, "Sequence dump (otherwise built from --h/--alpha/--k-max)");
    density->add_option("--h", h, "h in 2..4");
    density->add_option("--alpha", alpha_s, "alpha as num/den");
    density->add_option("--k-max", k_max, "Last shell");
    bool no_clean = false;
    density->add_flag("--no-clean", no_clean, "Skip cleaning before measuring");

    auto* badscan = app.add_subcommand("badscan", "Count bad tuples over a dyadic alpha grid");
    int scan_k_min = -1, step_log2 = 8;
    badscan->add_option("--h", h, "h in 2..4")->required();
    badscan->add_option("--k-min", scan_k_min, "First shell reported (default h+1)");
    badscan->add_option("--k-max", k_max, "Last shell");
    badscan->add_option("--step-log2", step_log2, "Grid step 2^-j")->check(CLI::Range(0, 12));
    badscan->add_flag("--certify", certify_flag, "Certify every collision found");
    badscan->add_option("--out", out_path, "CSV output");

    auto* visible = app.add_subcommand("visible", "Visible lattice points in a sector");
    std::string radius_s = "10", t_s = "0/1", eps_s = "1/2";
    visible->add_option("--radius", radius_s, "Radius R (rational)")->required();
    visible->add_option("--t", t_s, "Offset in turns");
    visible->add_option("--eps", eps_s, "Half-width in turns");

    auto* separation = app.add_subcommand("separation", "Random argument-separation checks");
    std::size_t samples = 1000;
    std::uint64_t sep_norm = 10000;
    separation->add_option("--h", h, "Tuple half-size")->required();
    separation->add_option("--samples", samples, "Number of random tuples");
    separation->add_option("--max-norm", sep_norm, "Largest prime norm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    SearchOptions search;
    try {
        const PrecisionPolicy policy = policy_of(common);
        search.budget = common.budget;

        if (*sieve) {
            Output out(out_path);
            for (const auto& p : sieve_gaussian_primes(max_norm, common.sieve_cap))
                out.stream() << Json{{"a", p.a}, {"b_im", p.b}, {"norm", p.norm}}.dump() << '\n';
        } else if (*finite) {
            const FiniteBhSet s = build_finite_bh(x, h, policy, common.threads);
            const DensityReport d = density_report(s);
            Json rep{{"config", {{"command", "finite"}, {"h", h}, {"x", x}, {"common", common_json(common)}}},
                     {"norm_radius", finite_norm_radius(x, h)},
                     {"source_primes", s.source_primes.size()},
                     {"elements", s.elements},
                     {"count", d.count},
                     {"density_ratio", d.ratio}};
            if (verify_flag) rep["collisions"] = find_sum_collisions(s.elements, h, search).size();
            Output out(out_path);
            out.stream() << rep.dump() << '\n';
        } else if (*shells) {
            ShellConfig cfg = make_config(h, ExactRational::parse(alpha_s));
            cfg.precision = policy;
            cfg.sieve_cap = common.sieve_cap;
            if (k_min < 0) k_min = h + 1;
            const Shells sh = SequenceBuilder(h, k_min, k_max, policy, common.sieve_cap).encode(cfg.alpha);
            Output out(out_path);
            write_sequence_dump(out.stream(), cfg, k_min, k_max, flatten(sh));
        } else if (*verify) {
            const SequenceDump d = load_dump(in_path);
            ShellConfig cfg = make_config(d.h, d.alpha);
            cfg.precision = policy;
            SearchStats stats;
            const auto records = find_collisions(d.elements, d.h, search, &stats);
            Output out(out_path);
            std::size_t valid = 0;
            for (const auto& r : records) {
                if (certify_flag) {
                    const auto c = certify(r, cfg);
                    valid += c.valid() ? 1 : 0;
                    out.stream() << certificate_json(c).dump() << '\n';
                } else {
                    out.stream() << collision_json(r).dump() << '\n';
                }
            }
            Json summary{{"records", records.size()}, {"elements", d.elements.size()},
                         {"enumerations", stats.enumerations}, {"excluded_strata", stats.excluded_strata}};
            if (certify_flag) summary["certified"] = valid;
            std::cerr << summary.dump() << '\n';
        } else if (*clean) {
            const SequenceDump d = load_dump(in_path);
            ShellConfig cfg = make_config(d.h, d.alpha);
            const auto cleaned = clean_sequence(group_by_shell(d.elements), d.h, search);
            const auto after = find_collisions(cleaned, d.h, search);
            Output out(out_path);
            write_sequence_dump(out.stream(), cfg, d.k_min, d.k_max, cleaned);
            std::cerr << Json{{"kept", cleaned.size()},
                              {"removed", d.elements.size() - cleaned.size()},
                              {"collisions_after", after.size()}}
                             .dump()
                      << '\n';
        } else if (*density) {
            std::vector<EncodedElement> el;
            if (!in_path.empty()) {
                const SequenceDump d = load_dump(in_path);
                h = d.h;
                alpha_s = d.alpha.str();
                k_max = d.k_max;
                el = d.elements;
            } else {
                el = flatten(SequenceBuilder(h, h + 1, k_max, policy, common.sieve_cap).encode(ExactRational::parse(alpha_s)));
            }
            if (!no_clean) el = clean_sequence(group_by_shell(el), h, search);
            const ExponentEstimate est = exponent_estimate(b_values(el), h);
            Json pts = Json::array();
            for (auto [lx, ly] : est.points) pts.push_back({lx, ly});
            std::cout << Json{{"config", {{"command", "density"}, {"h", h}, {"alpha", alpha_s}, {"k_max", k_max},
                                          {"cleaned", !no_clean}, {"common", common_json(common)}}},
                              {"elements", el.size()},
                              {"estimate", est.slope},
                              {"target", est.target},
                              {"points", pts}}
                             .dump()
                      << '\n';
        } else if (*badscan) {
            ScanOptions opts;
            opts.k_min = scan_k_min < 0 ? h + 1 : scan_k_min;
            opts.k_max = k_max;
            opts.step_log2 = step_log2;
            opts.certify = certify_flag;
            opts.threads = common.threads;
            opts.search = search;
            opts.precision = policy;
            opts.sieve_cap = common.sieve_cap;
            const ScanReport rep = alpha_scan(h, opts);
            Output out(out_path);
            write_scan_csv(out.stream(), rep.rows);
            Json per_k = Json::array();
            for (const auto& [key, v] : rep.mean_ratio)
                per_k.push_back({{"K", key.first}, {"l", key.second}, {"mean_ratio", v}, {"integral", rep.integral.at(key)}});
            Json refs = Json::array();
            for (const auto& r : rep.references)
                refs.push_back({{"K", r.K}, {"l", r.l}, {"log2_shape_over_c", r.log2_shape_c},
                                {"log2_shape_over_c_minus_1", r.log2_shape_c_minus_1}, {"k_powers", r.k_powers}});
            std::cerr << Json{{"records", rep.records}, {"certified", rep.certified}, {"failed", rep.failed},
                              {"undecided", rep.undecided}, {"per_K", per_k}, {"references", refs}}
                             .dump()
                      << '\n';
        } else if (*visible) {
            SectorQuery q{ExactRational::parse(radius_s), ExactRational::parse(t_s), ExactRational::parse(eps_s)};
            const SectorCount c = count_in_sector(q, policy);
            std::cout << Json{{"config", {{"command", "visible"}, {"radius", q.radius.str()}, {"t", q.t.str()},
                                          {"eps", q.eps.str()}}},
                              {"count", c.count},
                              {"undecided", c.undecided},
                              {"bound_turns_form", c.bound_turns_form},
                              {"bound_radian_form", c.bound_radian_form}}
                             .dump()
                      << '\n';
        } else if (*separation) {
            const auto s = separation_suite(h, samples, sep_norm, common.seed, policy, common.threads);
            std::cout << Json{{"config", {{"command", "separation"}, {"h", h}, {"samples", samples},
                                          {"max_norm", sep_norm}, {"common", common_json(common)}}},
                              {"certified_true", s.certified_true},
                              {"certified_false", s.certified_false},
                              {"undecided", s.undecided},
                              {"min_margin", s.min_margin}}
                             .dump()
                      << '\n';
        }
    } catch (const SearchBudgetExceeded& e) {
        std::cerr << "budget: " << e.what() << '\n';
        return 3;
    } catch (const PrecisionCapExceeded& e) {
        std::cerr << "precision: " << e.what() << '\n';
        return 3;
    } catch (const PreconditionViolation& e) {
        std::cerr << "precondition: " << e.what() << '\n';
        return 2;
    } catch (const MalformedEncoding& e) {
        std::cerr << "malformed: " << e.what() << '\n';
        return 2;
    } catch (const InsufficientData& e) {
        std::cerr << "insufficient data: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
