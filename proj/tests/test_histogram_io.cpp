#include <gtest/gtest.h>

#include <random>

#include "testutil.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/histogram_io.hpp"
#include "twinbeam/moments.hpp"

using namespace twinbeam;
using testutil::TempDir;
using testutil::write_text;

TEST(LoadHistogram, SingleVacuumRow) {
  TempDir dir;
  const auto h = load_histogram(write_text(dir / "h.csv", "cs,ci,count\n0,0,100000\n"));
  EXPECT_EQ(h.shots(), 100000u);
  ASSERT_EQ(h.entries().size(), 1u);
  EXPECT_EQ(h.count(0, 0), 100000u);
}

TEST(LoadHistogram, ShotsIsColumnSum) {
  TempDir dir;
  const auto h = load_histogram(write_text(dir / "h.csv", "cs,ci,count\n1,1,60\n0,0,40\n"));
  EXPECT_EQ(h.shots(), 100u);
  EXPECT_EQ(h.entries().size(), 2u);
  EXPECT_EQ(h.count(1, 1), 60u);
}

TEST(LoadHistogram, DuplicateRowRejected) {
  TempDir dir;
  EXPECT_THROW(load_histogram(write_text(dir / "h.csv", "cs,ci,count\n1,1,60\n1,1,40\n")),
               DuplicateEntry);
}

TEST(LoadHistogram, CrlfAndBomAccepted) {
  TempDir dir;
  const auto h =
      load_histogram(write_text(dir / "h.csv", "\xEF\xBB\xBF" "cs,ci,count\r\n2,3,5\r\n0,1,7\r\n"));
  EXPECT_EQ(h.shots(), 12u);
  EXPECT_EQ(h.count(2, 3), 5u);
}

TEST(LoadHistogram, MalformedInputsAreParseErrors) {
  TempDir dir;
  const char* bad[] = {"cs,ci,count\n-1,0,5\n",  "cs,ci,count\n1,0,-5\n",
                       "cs,ci,count\n1.5,0,5\n", "cs,ci,count\n1,0\n",
                       "cs,ci,count\n1,0,5,6\n", "cs,ci,count\na,0,5\n",
                       "x,y,count\n1,0,5\n",     "cs,ci,count\n1,0,0\n"};
  for (const char* text : bad) {
    SCOPED_TRACE(text);
    EXPECT_THROW(load_histogram(write_text(dir / "bad.csv", text)), ParseError);
  }
}

TEST(LoadHistogram, EmptyAndMissing) {
  TempDir dir;
  EXPECT_THROW(load_histogram(write_text(dir / "e.csv", "cs,ci,count\n")), EmptyHistogram);
  EXPECT_THROW(load_histogram(write_text(dir / "e2.csv", "")), EmptyHistogram);
  EXPECT_THROW(load_histogram(dir / "missing.csv"), FileNotFound);
}

TEST(LoadHistogram, ErrorsCarryInputStage) {
  TempDir dir;
  try {
    load_histogram(dir / "missing.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "input");
  }
}

TEST(LoadDarkRecord, ZeroDark) {
  TempDir dir;
  const auto d = load_dark_record(write_text(dir / "d.csv", "ds,di,count\n0,0,1000\n"));
  const RawMoments m = photocount_moments(d);
  EXPECT_EQ(m.value.mean_s, 0.0);
  EXPECT_EQ(m.value.mean_i, 0.0);
  EXPECT_EQ(m.value.second_s, 0.0);
  EXPECT_EQ(m.value.cross, 0.0);
}

TEST(LoadDarkRecord, TwoRowMeans) {
  TempDir dir;
  const auto d = load_dark_record(write_text(dir / "d.csv", "ds,di,count\n1,0,100\n0,0,900\n"));
  const RawMoments m = photocount_moments(d);
  EXPECT_DOUBLE_EQ(m.value.mean_s, 0.1);
  EXPECT_EQ(m.value.mean_i, 0.0);
}

TEST(LoadDarkRecord, MissingFile) {
  TempDir dir;
  EXPECT_THROW(load_dark_record(dir / "nope.csv"), FileNotFound);
}

TEST(LoadDarkRecord, HistogramHeaderRejected) {
  TempDir dir;
  EXPECT_THROW(load_dark_record(write_text(dir / "d.csv", "cs,ci,count\n0,0,10\n")), ParseError);
}

TEST(ArmCounts, ProductRecordFromIndependentArms) {
  TempDir dir;
  const auto s = load_arm_counts(write_text(dir / "s.csv", "d,count\n0,3\n1,1\n"));
  const auto i = load_arm_counts(write_text(dir / "i.csv", "d,count\n0,1\n2,1\n"));
  const DarkCountRecord rec = product_record(s, i);
  EXPECT_EQ(rec.shots(), 8u);
  EXPECT_EQ(rec.count(0, 0), 3u);
  EXPECT_EQ(rec.count(1, 2), 1u);
  const RawMoments m = photocount_moments(rec);
  // Product record factorizes the cross moment.
  EXPECT_DOUBLE_EQ(m.value.cross, m.value.mean_s * m.value.mean_i);
}

TEST(HistogramRoundTrip, RandomHistogramsAreBitExact) {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint32_t> coord(0, 60);
  std::uniform_int_distribution<std::uint64_t> count(1, 1u << 20);
  for (int trial = 0; trial < 20; ++trial) {
    PhotocountHistogram h;
    const int rows = 1 + trial * 7;
    for (int r = 0; r < rows; ++r) h.add(coord(rng), coord(rng), count(rng));
    write_histogram(h, dir / "h.csv");
    EXPECT_EQ(load_histogram(dir / "h.csv"), h);
    write_dark_record(h, dir / "d.csv");
    EXPECT_EQ(load_dark_record(dir / "d.csv"), h);
  }
}

TEST(HistogramRoundTrip, RowsNeverDropped) {
  TempDir dir;
  std::string text = "cs,ci,count\n";
  for (int k = 0; k < 500; ++k) text += std::to_string(k) + "," + std::to_string(k % 7) + ",3\n";
  const auto h = load_histogram(write_text(dir / "h.csv", text));
  EXPECT_EQ(h.entries().size(), 500u);
  EXPECT_EQ(h.shots(), 1500u);
}

namespace {

CalibrationResult sample_result() {
  CalibrationResult r;
  r.point = {0.24300000000000002, 0.2349999999999, 9.876543210987654};
  r.model = testutil::reference_model();
  r.declination = 0.0028496085582420499;
  r.moments = PhotoelectronMoments::from_central(2.411, 2.353, 2.489, 2.449, 0.597);
  r.moments.std_error = {0.002, 0.004, 0.01, 0.02, 0.03};
  r.moments.cov_stderr = 0.003;
  r.detectors = {8192, 8192, 9.9462890625e-06, 1.0 / 3.0};
  r.baseline = klyshko_estimate(r.moments);
  r.status = FitStatus::boundary;
  r.diagnostics = {16398, 2499, 1532, 0.005, 54, 46, 29, 9.2e-7, 1.48e-5};
  r.bootstrap = BootstrapSummary{{0.0061, 0.0067, 0.27}, 100, 3, 42, false};
  return r;
}

}  // namespace

TEST(ReportRoundTrip, NumericFieldsBitExact) {
  TempDir dir;
  Report rep;
  rep.result = sample_result();
  rep.histogram_sha256 = "ab";
  rep.dark_sha256 = "cd";
  rep.config = {{"grid-step", 0.005}};
  rep.idler_path_transmission = 0.992;
  write_report(rep, dir / "r.json");
  const Report back = load_report(dir / "r.json");
  const CalibrationResult& a = rep.result;
  const CalibrationResult& b = back.result;
  EXPECT_EQ(a.point.eta_s, b.point.eta_s);
  EXPECT_EQ(a.point.eta_i, b.point.eta_i);
  EXPECT_EQ(a.point.mean_pairs, b.point.mean_pairs);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.declination, b.declination);
  EXPECT_EQ(a.baseline.eta_s_cov, b.baseline.eta_s_cov);
  EXPECT_EQ(a.baseline.eta_i_cov, b.baseline.eta_i_cov);
  EXPECT_EQ(a.moments.value.cross, b.moments.value.cross);
  EXPECT_EQ(a.moments.cov, b.moments.cov);
  EXPECT_EQ(a.moments.cov_stderr, b.moments.cov_stderr);
  EXPECT_EQ(a.detectors.dark_rate_i, b.detectors.dark_rate_i);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.diagnostics.evaluations, b.diagnostics.evaluations);
  EXPECT_EQ(a.diagnostics.counts_truncated_mass, b.diagnostics.counts_truncated_mass);
  ASSERT_TRUE(b.bootstrap);
  EXPECT_EQ(a.bootstrap->stderr_values.eta_i, b.bootstrap->stderr_values.eta_i);
  EXPECT_EQ(a.bootstrap->failures, b.bootstrap->failures);
  EXPECT_EQ(back.histogram_sha256, "ab");
  EXPECT_EQ(back.config, rep.config);
  ASSERT_TRUE(back.idler_path_transmission);
  EXPECT_EQ(*back.idler_path_transmission, 0.992);
}

TEST(ReportRoundTrip, DocumentedFieldNames) {
  Report rep;
  rep.result = sample_result();
  const auto j = report_to_json(rep);
  for (const char* key : {"eta_s", "eta_i", "mean_pairs", "field", "declination", "stderr",
                          "baseline", "status", "inputs", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  for (const char* key : {"b_p", "M_p", "b_s", "M_s", "b_i", "M_i"})
    EXPECT_TRUE(j["field"].contains(key)) << key;
  EXPECT_TRUE(j["baseline"].contains("eta_s_klyshko"));
  EXPECT_TRUE(j["baseline"].contains("eta_i_klyshko"));
  EXPECT_TRUE(j["inputs"].contains("histogram_sha256"));
  EXPECT_TRUE(j["inputs"].contains("dark_sha256"));
}

TEST(ReportRoundTrip, StatusFlagPassthrough) {
  TempDir dir;
  for (FitStatus s : {FitStatus::converged, FitStatus::boundary, FitStatus::infeasible}) {
    Report rep;
    rep.result = sample_result();
    rep.result.status = s;
    write_report(rep, dir / "r.json");
    EXPECT_EQ(load_report(dir / "r.json").result.status, s);
  }
  Report rep;
  rep.result.status = FitStatus::infeasible;
  EXPECT_EQ(report_to_json(rep)["status"], "infeasible-everywhere");
}

TEST(ReportRoundTrip, PoissonAndVacuumComponents) {
  TempDir dir;
  Report rep;
  rep.result = sample_result();
  rep.result.model = {FieldComponent::poisson(3.5), FieldComponent::vacuum(),
                      FieldComponent::thermal(2.0, 0.25)};
  rep.result.bootstrap.reset();
  write_report(rep, dir / "r.json");
  const Report back = load_report(dir / "r.json");
  EXPECT_EQ(back.result.model, rep.result.model);
  EXPECT_FALSE(back.result.bootstrap);
}

TEST(ReportWrite, UnwritableLocationIsIoError) {
  Report rep;
  rep.result = sample_result();
  EXPECT_THROW(write_report(rep, "/nonexistent-dir/sub/report.json"), IoError);
  EXPECT_THROW(write_histogram(PhotocountHistogram{}, "/nonexistent-dir/h.csv"), IoError);
}

TEST(Checksum, KnownDigest) {
  TempDir dir;
  EXPECT_EQ(file_sha256(write_text(dir / "a.txt", "abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(file_sha256(dir / "missing"), FileNotFound);
}

TEST(TruthSidecar, RoundTrip) {
  SimulationConfig c;
  c.model = testutil::reference_model();
  c.signal = testutil::reference_signal();
  c.idler = testutil::reference_idler();
  c.shots = 12345;
  c.seed = 0xDEADBEEFCAFEull;
  const SimulationConfig back = truth_from_json(truth_to_json(c));
  EXPECT_EQ(back.model, c.model);
  EXPECT_EQ(back.signal, c.signal);
  EXPECT_EQ(back.idler, c.idler);
  EXPECT_EQ(back.shots, c.shots);
  EXPECT_EQ(back.seed, c.seed);
  // The sidecar's field block uses the report's schema.
  EXPECT_EQ(truth_to_json(c)["field"], model_to_json(c.model));
}

TEST(TruthSidecar, MalformedIsParseError) {
  EXPECT_THROW(truth_from_json(nlohmann::json::parse(R"({"field":{}})")), ParseError);
}
