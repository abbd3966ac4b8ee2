#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "flowsolve/errors.hpp"
#include "flowsolve/svg_plot.hpp"

using namespace flowsolve;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("render_svg_plot") {
  const std::vector<PlotSeries> series{{"euler", {10, 20, 40}, {1e-1, 5e-2, 2.5e-2}},
                                       {"heun <pc>", {10, 20, 40}, {1e-2, 2.5e-3, 6.25e-4}}};
  PlotAxes axes{"NFE", "error", true, true, "convergence"};
  const std::string svg = render_svg_plot(series, axes);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(svg.find("euler") != std::string::npos);
  CHECK(svg.find("heun &lt;pc&gt;") != std::string::npos);
  CHECK(svg.find("convergence") != std::string::npos);
}

TEST_CASE("svg plot validation") {
  PlotAxes axes{"x", "y", false, true, ""};
  CHECK_THROWS_AS(render_svg_plot({}, axes), InvalidArgument);
  CHECK_THROWS_AS(render_svg_plot({{"empty", {}, {}}}, axes), InvalidArgument);
  CHECK_THROWS_AS(render_svg_plot({{"ragged", {1, 2}, {1}}}, axes), InvalidArgument);
  try {
    render_svg_plot({{"bad", {1, 2}, {1.0, 0.0}}}, axes);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
  // linear axes accept non-positive values
  axes.log_y = false;
  CHECK_NOTHROW(render_svg_plot({{"ok", {1, 2}, {-1.0, 0.0}}}, axes));
  // a single point still renders
  CHECK_NOTHROW(render_svg_plot({{"one", {1}, {1}}}, axes));
}

TEST_CASE("emit_svg_plot") {
  const auto dir = std::filesystem::temp_directory_path() / "flowsolve_svg_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / "plot.svg";
  emit_svg_plot({{"a", {1, 2, 3}, {3, 2, 1}}}, {"x", "y", false, false, ""}, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(emit_svg_plot({{"a", {1}, {1}}}, {}, dir / "missing_dir" / "p.svg"),
                  InvalidArgument);
}
