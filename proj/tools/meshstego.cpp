// Command-line front end: embed, extract, costmap, capacity, stats, bench.
//
// Exit codes: 0 ok, 2 usage, 3 capacity, 4 parse, 5 params-mismatch.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "meshstego/meshstego.hpp"

namespace ms = meshstego;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitParse = 4;
constexpr int kExitParams = 5;

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class FileError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write '" + path + "'");
    out << data;
}

ms::MeshFormat detect_format(const std::string& path, const std::string& text,
                             const std::string& override_name) {
    if (override_name == "off") return ms::MeshFormat::Off;
    if (override_name == "ply") return ms::MeshFormat::AsciiPly;
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (char& c : ext) c = char(std::tolower(c));
    if (ext == "off") return ms::MeshFormat::Off;
    if (ext == "ply") return ms::MeshFormat::AsciiPly;
    if (text.rfind("OFF", 0) == 0) return ms::MeshFormat::Off;
    if (text.rfind("ply", 0) == 0) return ms::MeshFormat::AsciiPly;
    throw UsageError("cannot determine mesh format of '" + path + "'; use --format");
}

ms::Mesh load_mesh(const std::string& path, const std::string& format_name,
                   ms::MeshFormat* format_out = nullptr) {
    const std::string text = read_file(path);
    const ms::MeshFormat fmt = detect_format(path, text, format_name);
    if (format_out) *format_out = fmt;
    return ms::parse_mesh(text, fmt);
}

// Change sets of the default payload presets.
std::vector<std::int64_t> preset_changes(double alpha) {
    auto range = [](std::int64_t lo, std::int64_t hi) {
        std::vector<std::int64_t> v;
        for (std::int64_t s = lo; s <= hi; ++s) v.push_back(s);
        return v;
    };
    if (alpha == 1.5) return {0, 1};
    if (alpha == 3.0) return range(-1, 2);
    if (alpha == 4.5) return range(-3, 4);
    if (alpha == 6.0) return range(-7, 8);
    // Otherwise: smallest preset that can carry the payload.
    for (auto& c : {std::vector<std::int64_t>{0, 1}, range(-1, 2), range(-3, 4), range(-7, 8)})
        if (alpha <= 3.0 * std::log2(double(c.size()))) return c;
    throw ms::CapacityError("payload " + std::to_string(alpha) +
                            " bpv exceeds the largest preset capacity of 12 bpv; pass --changes");
}

std::vector<std::int64_t> parse_changes(const std::string& list) {
    std::vector<std::int64_t> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw UsageError("empty entry in --changes");
        out.push_back(std::stoll(tok));
    }
    if (out.size() < 2) throw UsageError("--changes needs at least two steps");
    return out;
}

struct CommonOpts {
    double alpha = 0.0;
    std::string changes;
    std::string profile = "ifpd-cs";
    int kstar = 6;
    int stc_height = 12;
    std::uint64_t seed = 1;
    int threads = ms::default_thread_count();
    std::string format;
    bool json = false;
    double mu = 1.0;
    double sigma = 1e-4;
    double beta = 1.0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_payload) {
    if (with_payload) {
        cmd->add_option("--alpha", o.alpha, "payload in bits per vertex");
        cmd->add_option("--changes", o.changes, "comma list of integer change steps");
        cmd->add_option("--profile", o.profile,
                        "cost profile: ifpd-cs, ifpd-s1, ifpd-s2, ifpd-s3, vnd, gcd, dihedral");
        cmd->add_option("--stc-height", o.stc_height, "submatrix height h (6..15)");
        cmd->add_option("--seed", o.seed, "shared submatrix seed");
        cmd->add_option("--mu", o.mu, "cost scale factor");
        cmd->add_option("--sigma", o.sigma, "vnd/gcd sigma");
        cmd->add_option("--beta", o.beta, "gcd curvature exponent");
    }
    cmd->add_option("--kstar", o.kstar, "decimal digits kept per coordinate");
    cmd->add_option("--threads", o.threads, "worker threads for cost computation");
    cmd->add_option("--format", o.format, "mesh format override: off or ply")
        ->check(CLI::IsMember({"off", "ply", ""}));
    cmd->add_flag("--json", o.json, "machine-readable output");
}

std::vector<std::int64_t> resolve_changes(const CommonOpts& o) {
    if (!o.changes.empty()) return parse_changes(o.changes);
    if (o.alpha > 0.0) return preset_changes(o.alpha);
    throw UsageError("either --alpha or --changes is required");
}

ms::CostProfile resolve_profile(const std::string& name, bool allow_dihedral) {
    auto p = ms::profile_from_name(name);
    if (!p) throw UsageError("unknown profile '" + name + "'");
    if (*p == ms::CostProfile::Dihedral && !allow_dihedral)
        throw UsageError("the dihedral profile is a costmap/bench diagnostic only");
    return *p;
}

ms::CostTable build_table(const ms::Mesh& mesh, const CommonOpts& o,
                          const std::vector<std::int64_t>& changes, bool allow_dihedral) {
    return ms::build_cost_table(mesh, resolve_profile(o.profile, allow_dihedral), changes,
                                o.kstar, o.mu, o.threads, o.sigma, o.beta);
}

void check_precision(const ms::Mesh& mesh, int kstar) {
    const int detected = ms::detect_k_star(mesh);
    if (detected > kstar)
        throw ms::QuantizeError("mesh uses " + std::to_string(detected) +
                                " fractional digits but k* is " + std::to_string(kstar) +
                                "; raise --kstar");
}

std::string default_stego_name(const std::string& cover) {
    const auto dot = cover.find_last_of('.');
    if (dot == std::string::npos) return cover + ".stego";
    return cover.substr(0, dot) + ".stego" + cover.substr(dot);
}

std::string default_params_name(const std::string& cover) {
    const auto dot = cover.find_last_of('.');
    return (dot == std::string::npos ? cover : cover.substr(0, dot)) + ".params";
}

int cmd_embed(const std::string& cover_path, const std::string& message_path,
              std::string out_path, std::string params_path, const CommonOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    ms::MeshFormat fmt;
    const ms::Mesh cover = load_mesh(cover_path, o.format, &fmt);
    check_precision(cover, o.kstar);
    if (o.alpha <= 0.0) throw UsageError("--alpha is required for embed");

    const std::string message_bytes = read_file(message_path);
    const auto bits = ms::bytes_to_bits(
        {reinterpret_cast<const std::uint8_t*>(message_bytes.data()), message_bytes.size()});

    const auto changes = resolve_changes(o);
    const ms::CostTable table = build_table(cover, o, changes, false);

    ms::EmbedConfig cfg;
    cfg.alpha = o.alpha;
    cfg.changes = changes;
    cfg.k_star = o.kstar;
    cfg.stc_h = o.stc_height;
    cfg.stc_seed = o.seed;
    const ms::EmbedResult result = ms::embed(cover, bits, cfg, table);

    if (out_path.empty()) out_path = default_stego_name(cover_path);
    if (params_path.empty()) params_path = default_params_name(cover_path);
    write_file(out_path, ms::write_mesh(result.stego, fmt, o.kstar));
    write_file(params_path, ms::serialize_params(result.params));

    double expected_distortion = 0.0;
    for (const auto& ch : result.channels) expected_distortion += ch.expected_distortion;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (o.json) {
        json j = {{"command", "embed"},
                  {"stego", out_path},
                  {"params", params_path},
                  {"vertices", cover.vertex_count()},
                  {"message_bits", bits.size()},
                  {"capacity_bits", result.capacity_bits},
                  {"expected_distortion", expected_distortion},
                  {"padded_realizations", result.padded_realizations},
                  {"seconds", seconds}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "embedded " << bits.size() << " bits (capacity " << result.capacity_bits
                  << " bits, " << double(result.capacity_bits) / double(cover.vertex_count())
                  << " bpv)\n"
                  << "expected distortion " << expected_distortion << "\n"
                  << "stego mesh: " << out_path << "\nparameters: " << params_path << "\n"
                  << "wall time " << seconds << " s\n";
    }
    return kExitOk;
}

int cmd_extract(const std::string& stego_path, const std::string& params_path,
                const std::string& out_path, const CommonOpts& o) {
    const ms::Mesh stego = load_mesh(stego_path, o.format);
    const ms::StegoParams params = ms::parse_params(read_file(params_path));
    const auto bits = ms::extract(stego, params);
    const auto bytes = ms::bits_to_bytes(bits);
    const std::string data(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (out_path.empty()) {
        std::cout.write(data.data(), std::streamsize(data.size()));
    } else {
        write_file(out_path, data);
        if (o.json) {
            json j = {{"command", "extract"}, {"bits", bits.size()}, {"out", out_path}};
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "extracted " << bits.size() << " bits to " << out_path << "\n";
        }
    }
    return kExitOk;
}

int cmd_costmap(const std::string& cover_path, const std::string& out_path, const CommonOpts& o) {
    const ms::Mesh cover = load_mesh(cover_path, o.format);
    const auto changes = resolve_changes(o);
    const ms::CostTable table = build_table(cover, o, changes, true);

    std::ostringstream out;
    out << "# vertex\tchannel\tstep\tcost\n";
    static const char names[4] = "xyz";
    for (std::size_t v = 0; v < table.vertices; ++v)
        for (int j = 0; j < 3; ++j)
            for (std::size_t t = 0; t < table.steps.size(); ++t)
                out << v << "\t" << names[j] << "\t" << table.steps[t] << "\t"
                    << table.at(v, j, t) << "\n";
    if (out_path.empty())
        std::cout << out.str();
    else
        write_file(out_path, out.str());
    return kExitOk;
}

int cmd_capacity(const std::string& cover_path, const CommonOpts& o) {
    const ms::Mesh cover = load_mesh(cover_path, o.format);
    check_precision(cover, o.kstar);
    const auto changes = resolve_changes(o);
    const double max_alpha = 3.0 * std::log2(double(changes.size()));
    const double alpha = o.alpha > 0.0 ? o.alpha : max_alpha;
    const ms::CostTable table = build_table(cover, o, changes, false);

    ms::EmbedConfig cfg;
    cfg.alpha = alpha;
    cfg.changes = changes;
    cfg.k_star = o.kstar;
    cfg.stc_h = o.stc_height;
    cfg.stc_seed = o.seed;
    const ms::CapacityReport rep = ms::plan_capacity(cover, table, alpha, cfg);

    if (o.json) {
        json j = {{"command", "capacity"},
                  {"vertices", cover.vertex_count()},
                  {"q", rep.q},
                  {"alpha", alpha},
                  {"max_alpha", rep.max_alpha},
                  {"net_alpha", rep.net_alpha},
                  {"total_bits", rep.total_bits},
                  {"channel_entropy_nats", rep.channel_entropy_nats},
                  {"layer_budget_bits", rep.layer_budget_bits}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "layers (Q): " << rep.q << "\n"
                  << "feasible payload range: (0, " << rep.max_alpha << "] bpv\n"
                  << "requested payload: " << alpha << " bpv\n";
        static const char names[4] = "xyz";
        for (int j = 0; j < 3; ++j) {
            std::cout << "channel " << names[j] << ": entropy "
                      << rep.channel_entropy_nats[j] << " nats, layer bits";
            for (auto b : rep.layer_budget_bits[j]) std::cout << " " << b;
            std::cout << "\n";
        }
        std::cout << "message capacity: " << rep.total_bits << " bits ("
                  << rep.net_alpha << " bpv net)\n";
    }
    return kExitOk;
}

int cmd_stats(const std::string& cover_path, const std::string& stego_path,
              const std::string& out_path, const CommonOpts& o) {
    const ms::Mesh cover = load_mesh(cover_path, o.format);
    const ms::Mesh stego = load_mesh(stego_path, o.format);
    if (cover.vertex_count() != stego.vertex_count())
        throw ms::ParamsError("vertex counts differ between cover and stego");

    const std::size_t nv = cover.vertex_count();
    std::vector<double> rmse(nv);
    double max_disp = 0.0, mean_disp = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
        const ms::Vec3 d = stego.vertices[v] - cover.vertices[v];
        const double dist = ms::norm(d);
        rmse[v] = dist / std::sqrt(3.0);
        max_disp = std::max(max_disp, dist);
        mean_disp += dist;
    }
    mean_disp /= double(nv);

    // Symmetric point-set Hausdorff distance over the vertex sets.
    auto one_sided = [](const std::vector<ms::Vec3>& a, const std::vector<ms::Vec3>& b) {
        double worst = 0.0;
        for (const auto& p : a) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : b) best = std::min(best, ms::norm(p - q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    const double hausdorff =
        std::max(one_sided(cover.vertices, stego.vertices), one_sided(stego.vertices, cover.vertices));

    if (o.json) {
        json j = {{"command", "stats"},
                  {"vertices", nv},
                  {"max_displacement", max_disp},
                  {"mean_displacement", mean_disp},
                  {"hausdorff", hausdorff},
                  {"rmse", rmse}};
        if (out_path.empty())
            std::cout << j.dump() << "\n";
        else
            write_file(out_path, j.dump() + "\n");
    } else {
        std::ostringstream out;
        out << "# vertex\trmse\n";
        for (std::size_t v = 0; v < nv; ++v) out << v << "\t" << rmse[v] << "\n";
        out << "# max_displacement " << max_disp << "\n# mean_displacement " << mean_disp
            << "\n# hausdorff " << hausdorff << "\n";
        if (out_path.empty())
            std::cout << out.str();
        else
            write_file(out_path, out.str());
    }
    return kExitOk;
}

int cmd_bench(const std::string& cover_path, const CommonOpts& o) {
    const ms::Mesh cover = load_mesh(cover_path, o.format);
    const auto changes = resolve_changes(o);
    json report = {{"command", "bench"},
                   {"vertices", cover.vertex_count()},
                   {"changes", changes.size()}};

    for (int pattern : {1, 2, 3}) {
        const auto t0 = std::chrono::steady_clock::now();
        const int workers = std::max(1, o.threads);
        std::vector<ms::OfpdReference> refs;
        refs.reserve(workers);
        for (int w = 0; w < workers; ++w) refs.emplace_back(cover, std::vector<int>{pattern});
        std::vector<double> slow(cover.vertex_count() * 3 * changes.size());
        ms::parallel_for(cover.vertex_count(), workers, [&](std::size_t v, int w) {
            for (int j = 0; j < 3; ++j)
                for (std::size_t t = 0; t < changes.size(); ++t)
                    slow[(v * 3 + j) * changes.size() + t] =
                        refs[w].cost(int(v), j, changes[t], o.kstar, pattern);
        });
        const double t_ofpd =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const auto t1 = std::chrono::steady_clock::now();
        ms::CoverFeatureCache cache(cover, {pattern});
        const auto fast = ms::ifpd_raw_tables(cache, changes, o.kstar, o.threads);
        const double t_ifpd =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

        double max_diff = 0.0;
        for (std::size_t i = 0; i < slow.size(); ++i)
            max_diff = std::max(max_diff, std::fabs(slow[i] - fast[pattern - 1][i]));

        const std::string key = "s" + std::to_string(pattern);
        report["ofpd_" + key + "_seconds"] = t_ofpd;
        report["ifpd_" + key + "_seconds"] = t_ifpd;
        report["speedup_" + key] = t_ofpd / std::max(t_ifpd, 1e-12);
        report["max_abs_difference_" + key] = max_diff;
        if (!o.json)
            std::cout << "S" << pattern << ": ofpd " << t_ofpd << " s, ifpd " << t_ifpd
                      << " s, speedup " << t_ofpd / std::max(t_ifpd, 1e-12)
                      << ", max |difference| " << max_diff << "\n";
    }
    if (o.json) std::cout << report.dump() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive triangle-mesh steganography with feature-preserving costs"};
    app.require_subcommand(1);

    std::string cover, stego, message, out, params;
    CommonOpts opts;

    auto* embed = app.add_subcommand("embed", "embed a message into a mesh");
    embed->add_option("--cover", cover, "cover mesh (.off/.ply)")->required();
    embed->add_option("--message", message, "message bytes to embed")->required();
    embed->add_option("--out", out, "stego mesh output path");
    embed->add_option("--params", params, "parameter file output path");
    add_common(embed, opts, true);

    auto* extract = app.add_subcommand("extract", "extract a message from a stego mesh");
    extract->add_option("--stego", stego, "stego mesh")->required();
    extract->add_option("--params", params, "parameter file from embedding")->required();
    extract->add_option("--out", out, "message output path (stdout if omitted)");
    add_common(extract, opts, false);

    auto* costmap = app.add_subcommand("costmap", "export the per-change cost table");
    costmap->add_option("--cover", cover, "cover mesh")->required();
    costmap->add_option("--out", out, "output path (stdout if omitted)");
    add_common(costmap, opts, true);

    auto* capacity = app.add_subcommand("capacity", "report embedding capacity");
    capacity->add_option("--cover", cover, "cover mesh")->required();
    add_common(capacity, opts, true);

    auto* stats = app.add_subcommand("stats", "per-vertex displacement statistics");
    stats->add_option("--cover", cover, "cover mesh")->required();
    stats->add_option("--stego", stego, "stego mesh")->required();
    stats->add_option("--out", out, "output path (stdout if omitted)");
    add_common(stats, opts, false);

    auto* bench = app.add_subcommand("bench", "time the slow reference against the fast path");
    bench->add_option("--cover", cover, "cover mesh")->required();
    add_common(bench, opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(embed)) return cmd_embed(cover, message, out, params, opts);
        if (app.got_subcommand(extract)) return cmd_extract(stego, params, out, opts);
        if (app.got_subcommand(costmap)) return cmd_costmap(cover, out, opts);
        if (app.got_subcommand(capacity)) return cmd_capacity(cover, opts);
        if (app.got_subcommand(stats)) return cmd_stats(cover, stego, out, opts);
        if (app.got_subcommand(bench)) return cmd_bench(cover, opts);
    } catch (const ms::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const ms::MeshParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ms::QuantizeError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ms::ParamsError& e) {
        std::cerr << "parameter mismatch: " << e.what() << "\n";
        return kExitParams;
    } catch (const ms::StcError& e) {
        std::cerr << "parameter mismatch: " << e.what() << "\n";
        return kExitParams;
    } catch (const FileError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
