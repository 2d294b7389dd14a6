// End-to-end checks of the command-line tool. Each case drives the installed
// binary through files in a scratch directory.
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fixtures.hpp"
#include "meshstego/meshstego.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef MESHSTEGO_CLI
#error "MESHSTEGO_CLI must point at the built binary"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(MESHSTEGO_CLI) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "meshstego_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_cover(const std::string& name, const meshstego::Mesh& m) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << meshstego::write_mesh(m, meshstego::MeshFormat::Off, 6);
    return p.string();
}

std::string write_bytes(const std::string& name, const std::string& data) {
    const fs::path p = scratch() / name;
    std::ofstream(p, std::ios::binary) << data;
    return p.string();
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli embed and extract round-trip") {
    const auto cover = write_cover("roundtrip.off", fixtures::curved_mesh(20, 1));
    const std::string payload = "attack at dawn";
    const auto msg = write_bytes("msg.bin", payload);
    const auto stego = (scratch() / "roundtrip.stego.off").string();
    const auto params = (scratch() / "roundtrip.params").string();

    const auto emb = run("embed --cover " + cover + " --message " + msg +
                         " --alpha 3 --profile ifpd-cs --seed 7 --out " + stego + " --params " +
                         params + " --json");
    REQUIRE(emb.exit_code == 0);
    const json j = json::parse(emb.out);
    CHECK(j["message_bits"] == payload.size() * 8);
    CHECK(j["padded_realizations"] == 0);

    const auto out = (scratch() / "recovered.bin").string();
    const auto ext = run("extract --stego " + stego + " --params " + params + " --out " + out);
    REQUIRE(ext.exit_code == 0);
    // MSB-first byte packing: the recovered prefix is the message itself.
    CHECK(read_bytes(out).substr(0, payload.size()) == payload);
}

TEST_CASE("cli rejects payloads beyond capacity with exit code 3") {
    const auto cover = write_cover("tiny.off", fixtures::sphere(8, 6));
    const auto msg = write_bytes("big.bin", std::string(4000, 'x'));
    const auto r = run("embed --cover " + cover + " --message " + msg + " --alpha 1.5");
    CHECK(r.exit_code == 3);
}

TEST_CASE("cli usage and parse errors") {
    CHECK(run("embed --cover nowhere.off").exit_code == 2); // missing --message
    const auto junk = write_bytes("junk.off", "OFF\n1 1 0\nnot numbers here\n");
    const auto msg = write_bytes("m.bin", "a");
    CHECK(run("embed --cover " + junk + " --message " + msg + " --alpha 3").exit_code == 4);
    CHECK(run("embed --cover " + scratch().string() + "/missing.off --message " + msg +
              " --alpha 3")
              .exit_code == 4);
}

TEST_CASE("cli extract with mismatched params exits with code 5") {
    const auto cover = write_cover("mismatch.off", fixtures::sphere(8, 6));
    const auto params = write_bytes("bad.params", "version = 1\nnot_a_key = 2\n");
    CHECK(run("extract --stego " + cover + " --params " + params).exit_code == 5);
}

TEST_CASE("cli costmap shape and planar zeros") {
    const auto cover = write_cover("plane.off", fixtures::grid(6, 6, 0.25));
    const auto out = (scratch() / "map.tsv").string();
    const auto r = run("costmap --cover " + cover + " --changes -2,-1,0,1,2 --profile dihedral" +
                       " --out " + out);
    REQUIRE(r.exit_code == 0);

    std::ifstream in(out);
    std::string line;
    std::getline(in, line); // header
    std::size_t rows = 0;
    double worst_inplane = 0.0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream ss(line);
        long vertex, step;
        char channel;
        double cost;
        ss >> vertex >> channel >> step >> cost;
        if (step == 0) CHECK(cost == 0.0);
        if (channel == 'x' || channel == 'y') worst_inplane = std::max(worst_inplane, cost);
    }
    CHECK(rows == 49 * 3 * 5);
    CHECK(worst_inplane <= 1e-9);
}

TEST_CASE("cli capacity matches the embed-side check") {
    const auto cover = write_cover("cap.off", fixtures::curved_mesh(21));
    const auto r = run("capacity --cover " + cover + " --alpha 3 --json");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["q"] == 2);
    CHECK(j["max_alpha"] == doctest::Approx(6.0));
    const std::size_t total = j["total_bits"];

    // A message of exactly the reported capacity embeds; one byte more fails.
    const std::size_t bytes = total / 8;
    const auto msg = write_bytes("cap.bin", std::string(bytes, 'q'));
    CHECK(run("embed --cover " + cover + " --message " + msg + " --alpha 3").exit_code == 0);
    const auto over = write_bytes("cap_over.bin", std::string(bytes + 1, 'q'));
    CHECK(run("embed --cover " + cover + " --message " + over + " --alpha 3").exit_code == 3);
}

TEST_CASE("cli capacity for the two-change preset") {
    const auto cover = write_cover("cap2.off", fixtures::sphere(10, 8));
    const auto r = run("capacity --cover " + cover + " --alpha 1.5 --json");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["q"] == 1);
    CHECK(j["max_alpha"] == doctest::Approx(3.0));
}

TEST_CASE("cli stats") {
    const meshstego::Mesh base = fixtures::sphere(10, 8);
    const auto cover = write_cover("stats_cover.off", base);

    // Identical meshes: all zeros.
    auto r = run("stats --cover " + cover + " --stego " + cover + " --json");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["max_displacement"] == 0.0);
    CHECK(j["hausdorff"] == 0.0);

    // One vertex moved by one quantization step.
    meshstego::Mesh moved = base;
    moved.decimals.clear();
    moved.vertices[5].x += 1e-6;
    const auto stego = write_cover("stats_stego.off", moved);
    r = run("stats --cover " + cover + " --stego " + stego + " --json");
    REQUIRE(r.exit_code == 0);
    j = json::parse(r.out);
    CHECK(double(j["rmse"][5]) == doctest::Approx(1e-6 / std::sqrt(3.0)).epsilon(1e-6));
    CHECK(double(j["rmse"][4]) == 0.0);
    CHECK(double(j["max_displacement"]) == doctest::Approx(1e-6).epsilon(1e-9));
}

TEST_CASE("cli stats rmse grows with the payload") {
    const meshstego::Mesh base = fixtures::curved_mesh(22, 1);
    const auto cover = write_cover("sweep.off", base);
    double prev = -1.0;
    for (double alpha : {1.5, 3.0, 4.5, 6.0}) {
        const auto capj =
            json::parse(run("capacity --cover " + cover + " --alpha " + std::to_string(alpha) +
                            " --json")
                            .out);
        const std::size_t bytes = std::size_t(capj["total_bits"]) / 8;
        const auto msg = write_bytes("sweep.bin", std::string(bytes, 'z'));
        const auto stego = (scratch() / "sweep.stego.off").string();
        const auto params = (scratch() / "sweep.params").string();
        REQUIRE(run("embed --cover " + cover + " --message " + msg + " --alpha " +
                    std::to_string(alpha) + " --out " + stego + " --params " + params)
                    .exit_code == 0);
        const auto statj =
            json::parse(run("stats --cover " + cover + " --stego " + stego + " --json").out);
        const double mean = statj["mean_displacement"];
        CHECK(mean > prev);
        prev = mean;
    }
}

TEST_CASE("cli bench on a tiny mesh agrees and is quick") {
    const auto cover = write_cover("bench.off", fixtures::sphere(6, 5));
    const auto r = run("bench --cover " + cover + " --changes -1,0,1 --json");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    for (const char* key : {"max_abs_difference_s1", "max_abs_difference_s2",
                            "max_abs_difference_s3"})
        CHECK(double(j[key]) <= 1e-9);
}

TEST_CASE("cli vnd profile embeds and extracts") {
    const auto cover = write_cover("vnd.off", fixtures::curved_mesh(23));
    const std::string payload = "vnd profile";
    const auto msg = write_bytes("vnd.bin", payload);
    const auto stego = (scratch() / "vnd.stego.off").string();
    const auto params = (scratch() / "vnd.params").string();
    REQUIRE(run("embed --cover " + cover + " --message " + msg +
                " --alpha 3 --profile vnd --out " + stego + " --params " + params)
                .exit_code == 0);
    const auto out = (scratch() / "vnd_out.bin").string();
    REQUIRE(run("extract --stego " + stego + " --params " + params + " --out " + out).exit_code ==
            0);
    CHECK(read_bytes(out).substr(0, payload.size()) == payload);

    // The dihedral diagnostic is not an embedding profile.
    CHECK(run("embed --cover " + cover + " --message " + msg + " --alpha 3 --profile dihedral")
              .exit_code == 2);
}

TEST_CASE("cli wrong params still exits cleanly with garbage output") {
    const auto cover = write_cover("garbage.off", fixtures::curved_mesh(24));
    const std::string payload = "sensitive";
    const auto msg = write_bytes("g.bin", payload);
    const auto stego = (scratch() / "g.stego.off").string();
    const auto params = (scratch() / "g.params").string();
    REQUIRE(run("embed --cover " + cover + " --message " + msg + " --alpha 3 --seed 1 --out " +
                stego + " --params " + params)
                .exit_code == 0);

    // Re-derive params with a different seed: same shapes, wrong submatrices.
    meshstego::StegoParams p = meshstego::parse_params(read_bytes(params));
    p.stc_seed = 999;
    const auto wrong = write_bytes("wrong.params", meshstego::serialize_params(p));
    const auto out = (scratch() / "g_out.bin").string();
    const auto r = run("extract --stego " + stego + " --params " + wrong + " --out " + out);
    CHECK(r.exit_code == 0);
    CHECK(read_bytes(out).substr(0, payload.size()) != payload);

    // Empty message params give empty output.
    for (auto& lens : p.msg_lens) lens.assign(lens.size(), 0);
    const auto empty = write_bytes("empty.params", meshstego::serialize_params(p));
    const auto out2 = (scratch() / "empty_out.bin").string();
    REQUIRE(run("extract --stego " + stego + " --params " + empty + " --out " + out2).exit_code ==
            0);
    CHECK(read_bytes(out2).empty());
}

TEST_CASE("cli deterministic given identical flags") {
    const auto cover = write_cover("det.off", fixtures::curved_mesh(25));
    const auto msg = write_bytes("det.bin", "determinism");
    const auto s1 = (scratch() / "det1.off").string();
    const auto s2 = (scratch() / "det2.off").string();
    const auto p1 = (scratch() / "det1.params").string();
    const auto p2 = (scratch() / "det2.params").string();
    REQUIRE(run("embed --cover " + cover + " --message " + msg + " --alpha 4.5 --seed 11 --out " +
                s1 + " --params " + p1)
                .exit_code == 0);
    REQUIRE(run("embed --cover " + cover + " --message " + msg + " --alpha 4.5 --seed 11 --out " +
                s2 + " --params " + p2)
                .exit_code == 0);
    CHECK(read_bytes(s1) == read_bytes(s2));
    CHECK(read_bytes(p1) == read_bytes(p2));
}
