#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

// Exit-code contract: 0 success, 2 usage, 3 numeric failure, 4 I/O.

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(ECGUNC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "ecgunc_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const char* name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("") == 2);
    CHECK(run("gen-data") == 2);                  // missing --out
    CHECK(run("no-such-command") == 2);
    CHECK(run("train --data x --out y --net-scale tiny") == 2);
    CHECK(run("sweep --eval-dir x --out y --grid nonsense") == 2);
}

TEST_CASE("help exits cleanly") {
    CHECK(run("--help") == 0);
}

TEST_CASE("I/O errors exit with 4") {
    TempDir tmp;
    CHECK(run("train --data /nonexistent/path.ecgd --out " + (tmp / "m.ecgm")) == 4);
    // corrupt checkpoint magic
    const std::string bad = tmp / "bad.ecgm";
    {
        std::ofstream os(bad, std::ios::binary);
        os << "JUNKJUNKJUNK";
    }
    CHECK(run("gen-data --out " + (tmp / "d.ecgd") + " --records-per-class 2 --seed 1") == 0);
    CHECK(run("evaluate --data " + (tmp / "d.ecgd") + " --ckpt " + bad + " --out " +
              (tmp / "ev")) == 4);
}

TEST_CASE("pipeline on a small dataset succeeds end to end") {
    TempDir tmp;
    CHECK(run("gen-data --out " + (tmp / "d.ecgd") + " --records-per-class 4 --seed 3" +
              " --index-csv " + (tmp / "index.csv")) == 0);
    CHECK(fs::exists(tmp.path / "index.csv"));
    CHECK(fs::exists(tmp.path / "d.ecgd.sidecar.csv"));
    CHECK(run("train --data " + (tmp / "d.ecgd") + " --out " + (tmp / "m.ecgm") +
              " --max-steps 6 --eval-every 3 --batch-size 4 --seed 3") == 0);
    CHECK(fs::exists(tmp.path / "m.ecgm.history.csv"));
    CHECK(run("evaluate --data " + (tmp / "d.ecgd") + " --ckpt " + (tmp / "m.ecgm") +
              " --out " + (tmp / "ev") + " --n-mc 3 --seed 3 --dump-probs") == 0);
    CHECK(run("sweep --eval-dir " + (tmp / "ev") + " --out " + (tmp / "sw")) == 0);
    CHECK(fs::exists(tmp.path / "ev" / "uncertainty.csv"));
    CHECK(fs::exists(tmp.path / "ev" / "manifest.json"));
    CHECK(fs::exists(tmp.path / "ev" / "mc_probs.ecgp"));
    CHECK(fs::exists(tmp.path / "ev" / "stats_report.txt"));
    CHECK(fs::exists(tmp.path / "ev" / "scatter_model_data.svg"));
    CHECK(fs::exists(tmp.path / "sw" / "sweep.svg"));
    CHECK(fs::exists(tmp.path / "sw" / "confusion_rejected.csv"));
    CHECK(fs::exists(tmp.path / "sw" / "manifest.json"));
}
