#include <gtest/gtest.h>

#include <filesystem>

#include "gasnet/io.hpp"
#include "support.hpp"

using namespace gasnet;

TEST(Io, FormatIsRoundTrip) {
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(std::stod(fmt(70e5)), 70e5);
  EXPECT_EQ(fmt(6850000), "6850000");
  EXPECT_EQ(std::stod(fmt(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(fmt(NAN), "nan");
  EXPECT_EQ(fmt(-INFINITY), "-inf");
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, OutputDirRecordsChecksums) {
  const auto dir = std::filesystem::temp_directory_path() / "gasnet_io_test";
  std::filesystem::remove_all(dir);
  OutputDir out(dir);
  out.write("a.csv", "x\n1\n");
  ASSERT_EQ(out.files().size(), 1u);
  EXPECT_EQ(out.files()[0].sha256, sha256_hex(read_file(dir / "a.csv")));
  const auto m = manifest_json(out, "run", "h", {1, 2}, 0.5);
  EXPECT_EQ(m["files"][0]["bytes"], 4);
  EXPECT_EQ(m["artifact_version"], artifact_version);
  std::filesystem::remove_all(dir);
}

TEST(Io, CsvHeadersCarryUnits) {
  Trajectory tr;
  tr.times = {0, 300};
  tr.node_ids = {1, 2};
  tr.pipe_ids = {5};
  tr.pressure = {{70e5, 69e5}, {70e5, 68.5e5}};
  tr.linepack = {{1e6}, {1.1e6}};
  tr.total = {1e6, 1.1e6};
  const auto p = pressure_csv(tr);
  EXPECT_EQ(p.substr(0, p.find('\n')), "time_s,node_id,pressure_Pa");
  EXPECT_NE(p.find("300,2,6850000\n"), std::string::npos);
  const auto l = linepack_csv(tr);
  EXPECT_EQ(l.substr(0, l.find('\n')), "time_s,linepack_kg_pipe_5,linepack_kg_total");
  EXPECT_EQ(crossings_csv({{2, 600, 49e5}}), "node_id,time_s,pressure_Pa,direction\n2,600,4900000,below_min\n");
}

TEST(Io, SolverConfigRoundTrip) {
  SolverConfig c;
  c.target_dx = 500;
  c.cfl = 0.5;
  c.eos = EosMode::ideal;
  const auto back = solver_config_from_json(solver_config_json(c));
  EXPECT_EQ(solver_config_json(back), solver_config_json(c));
  EXPECT_THROW(solver_config_from_json({{"cfl", 1.5}}), ValidationError);
  EXPECT_THROW(solver_config_from_json({{"eos_mode", "vdw"}}), ValidationError);
  const auto shipped = load_solver_config(test::data("solver_default.json"));
  EXPECT_EQ(solver_config_json(shipped), solver_config_json(SolverConfig{}));
}

TEST(Io, ConfigHashDependsOnInputs) {
  const std::vector<std::string> f{test::data("israel_11node.json")};
  SolverConfig c;
  const auto a = config_hash(f, c, "seed=1");
  EXPECT_EQ(a, config_hash(f, c, "seed=1"));
  EXPECT_NE(a, config_hash(f, c, "seed=2"));
  c.cfl = 0.5;
  EXPECT_NE(a, config_hash(f, c, "seed=1"));
}
