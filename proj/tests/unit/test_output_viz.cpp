#include <doctest.h>

#include <cmath>
#include <tuple>

#include "bemflow/output_viz.hpp"
#include "support/synthetic_csv.hpp"
#include "test_helpers.hpp"

using namespace bemflow;

namespace {

const viz::OutputTable& annual_table() {
    static const viz::OutputTable table =
        viz::parse_output_csv(testsupport::synthetic_annual_csv());
    return table;
}

// Pull every x,y pair out of a points="..." attribute.
std::vector<std::pair<double, double>> parse_points(const std::string& svg, std::size_t from) {
    const std::size_t attr = svg.find("points=\"", from);
    REQUIRE(attr != std::string::npos);
    const std::size_t begin = attr + 8;
    const std::size_t end = svg.find('"', begin);
    std::vector<std::pair<double, double>> points;
    std::size_t cursor = begin;
    while (cursor < end) {
        const std::size_t comma = svg.find(',', cursor);
        if (comma == std::string::npos || comma >= end) break;
        std::size_t space = svg.find(' ', comma);
        if (space == std::string::npos || space > end) space = end;
        points.emplace_back(std::stod(svg.substr(cursor, comma - cursor)),
                            std::stod(svg.substr(comma + 1, space - comma - 1)));
        cursor = space + 1;
    }
    return points;
}

double attr_value(const std::string& svg, const std::string& name) {
    const std::size_t pos = svg.find(name + "=\"");
    REQUIRE(pos != std::string::npos);
    const std::size_t begin = pos + name.size() + 2;
    return std::stod(svg.substr(begin, svg.find('"', begin) - begin));
}

}  // namespace

TEST_CASE("parse_datetime: formats, hour-24 normalization, errors") {
    const viz::DateTime a = viz::parse_datetime(" 01/01  01:00:00");
    CHECK(a.month == 1);
    CHECK(a.day == 1);
    CHECK(a.hour == 1);

    const viz::DateTime rollover = viz::parse_datetime("01/01 24:00:00");
    CHECK(rollover.month == 1);
    CHECK(rollover.day == 2);
    CHECK(rollover.hour == 0);

    // The last hour of the year normalizes to the start-of-next-year
    // instant, which sorts after every in-year timestamp.
    const viz::DateTime year_end = viz::parse_datetime("12/31 24:00:00");
    CHECK(year_end.month == 13);
    CHECK(year_end.day == 1);
    CHECK(viz::parse_datetime("12/31 23:00:00") < year_end);

    const viz::DateTime date_only = viz::parse_datetime("08/15");
    CHECK(date_only.hour == 0);

    CHECK_THROWS_AS(viz::parse_datetime("not a date"), viz::VizError);
    CHECK_THROWS_AS(viz::parse_datetime("13/01"), viz::VizError);
    CHECK_THROWS_AS(viz::parse_datetime("02/30"), viz::VizError);
}

TEST_CASE("parse_output_csv: annual hourly fixture has 8760 rows") {
    const viz::OutputTable& table = annual_table();
    CHECK(table.timestamps.size() == 8760);
    REQUIRE(table.columns.size() == 11);
    for (const auto& c : table.columns) CHECK(c.values.size() == 8760);

    int enduse = 0;
    int weather = 0;
    for (const auto& c : table.columns) {
        if (c.category == viz::Category::EndUse) ++enduse;
        if (c.category == viz::Category::Weather) ++weather;
    }
    CHECK(enduse == 6);
    CHECK(weather == 5);
}

TEST_CASE("header grammar: unit, frequency, category inference") {
    const viz::OutputTable table = viz::parse_output_csv(
        "Date/Time,Heating:Electricity [J](Hourly),Site Outdoor Air Drybulb Temperature "
        "[C](Hourly),Some Other Thing [m](Daily)\n"
        " 01/01  01:00:00,1,2,3\n");
    REQUIRE(table.columns.size() == 3);
    CHECK(table.columns[0].name == "Heating:Electricity");
    CHECK(table.columns[0].unit == "J");
    CHECK(table.columns[0].frequency == "Hourly");
    CHECK(table.columns[0].category == viz::Category::EndUse);
    CHECK(table.columns[1].category == viz::Category::Weather);
    CHECK(table.columns[2].category == viz::Category::Other);
    CHECK(table.timestamps.size() == 1);
}

TEST_CASE("parse_output_csv error paths") {
    CHECK_THROWS_AS(viz::parse_output_csv(""), viz::VizError);
    CHECK_THROWS_AS(viz::parse_output_csv("NotDate,X\n1,2\n"), viz::VizError);
    CHECK_THROWS_AS(viz::parse_output_csv("Date/Time,A [J](Hourly)\n 01/01  01:00:00,1,2\n"),
                    viz::VizError);
    try {
        viz::parse_output_csv("Date/Time,A [J](Hourly)\n nonsense,1\n");
        FAIL("expected UnparseableTimestamp");
    } catch (const viz::VizError& e) {
        CHECK(e.kind() == viz::VizErrorKind::UnparseableTimestamp);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("select_window: January week is 168 rows, August fortnight 336") {
    const viz::OutputTable& table = annual_table();

    const auto [jan_start, jan_end] = viz::window_from_text("01/01", "01/08");
    const viz::OutputTable january = viz::select_window(table, jan_start, jan_end);
    CHECK(january.timestamps.size() == 168);

    const auto [aug_start, aug_end] = viz::window_from_text("08/01", "08/15");
    const viz::OutputTable august = viz::select_window(table, aug_start, aug_end);
    CHECK(august.timestamps.size() == 336);

    // Full range is the identity.
    const viz::OutputTable all = viz::select_window(table, viz::DateTime{1, 1, 0, 0, 0},
                                                    viz::parse_datetime("12/31 24:00:00"));
    CHECK(all.timestamps.size() == 8760);

    // Aligned-window arithmetic: |rows| = span/frequency + 1.
    const viz::OutputTable aligned = viz::select_window(
        table, viz::parse_datetime("03/05 07:00:00"), viz::parse_datetime("03/06 07:00:00"));
    CHECK(aligned.timestamps.size() == 25);

    CHECK_THROWS_AS(viz::select_window(table, viz::parse_datetime("01/08"),
                                       viz::parse_datetime("01/01")),
                    viz::VizError);
}

TEST_CASE("enduse stack plot: bands, stacking conservation, legend, colors") {
    const viz::OutputTable& table = annual_table();
    viz::PlotSpec spec;
    std::tie(spec.window_start, spec.window_end) = viz::window_from_text("01/01", "01/08");
    const std::string svg = viz::enduse_stack_plot(table, spec);

    CHECK(attr_value(svg, "data-points") == 168);
    // One band per end-use column.
    std::size_t bands = 0;
    std::size_t pos = 0;
    while ((pos = svg.find("class=\"band\"", pos)) != std::string::npos) {
        ++bands;
        ++pos;
    }
    CHECK(bands == 6);
    CHECK(svg.find("fill=\"red\"") != std::string::npos);
    CHECK(svg.find("fill=\"blue\"") != std::string::npos);
    CHECK(svg.find("class=\"legend\"") != std::string::npos);
    CHECK(svg.find("class=\"title\"") != std::string::npos);
    CHECK(svg.find("Energy [J]") != std::string::npos);

    // Geometry: invert the y mapping on the LAST band's upper boundary and
    // compare against independently recomputed column sums.
    const viz::OutputTable window =
        viz::select_window(table, spec.window_start, spec.window_end);
    const double y_max = attr_value(svg, "data-ymax");
    const double plot_y = attr_value(svg, "data-plot-y");
    const double plot_h = attr_value(svg, "data-plot-h");

    const std::size_t last_band = svg.rfind("class=\"band\"");
    const auto points = parse_points(svg, last_band);
    REQUIRE(points.size() == 2 * window.timestamps.size());
    for (std::size_t i = 0; i < window.timestamps.size(); ++i) {
        double total = 0;
        for (const auto& c : window.columns)
            if (c.category == viz::Category::EndUse) total += c.values[i];
        const double y = points[i].second;
        const double reconstructed = (1.0 - (y - plot_y) / plot_h) * y_max;
        CHECK(std::abs(reconstructed - total) <= 1e-6 * std::max(1.0, std::abs(total)));
    }

    // Determinism: identical inputs, identical bytes.
    CHECK(viz::enduse_stack_plot(table, spec) == svg);
}

TEST_CASE("enduse stack plot: degenerate inputs") {
    const std::string csv =
        "Date/Time,Cooling:Electricity [J](Hourly),Fans:Electricity [J](Hourly)\n"
        " 01/01  01:00:00,5,0\n"
        " 01/01  02:00:00,7,0\n";
    const viz::OutputTable table = viz::parse_output_csv(csv);
    viz::PlotSpec spec;
    spec.window_start = viz::DateTime{1, 1, 0, 0, 0};
    spec.window_end = viz::DateTime{1, 2, 0, 0, 0};
    const std::string svg = viz::enduse_stack_plot(table, spec);
    // The all-zero Fans column still shows up in the legend.
    CHECK(svg.find("Fans:Electricity") != std::string::npos);

    const viz::OutputTable weather_only = viz::parse_output_csv(
        "Date/Time,Site Outdoor Air Drybulb Temperature [C](Hourly)\n 01/01  01:00:00,1\n");
    CHECK_THROWS_AS(viz::enduse_stack_plot(weather_only, spec), viz::VizError);
}

TEST_CASE("weather panels: one panel per variable, 336 points, rotated labels") {
    const viz::OutputTable& table = annual_table();
    viz::PlotSpec spec;
    std::tie(spec.window_start, spec.window_end) = viz::window_from_text("08/01", "08/15");
    const std::string svg = viz::weather_panels(table, spec);

    CHECK(attr_value(svg, "data-panels") == 5);
    CHECK(attr_value(svg, "data-points") == 336);
    CHECK(attr_value(svg, "data-label-rotation") == 45);

    std::size_t panels = 0;
    std::size_t pos = 0;
    while ((pos = svg.find("class=\"panel\"", pos)) != std::string::npos) {
        ++panels;
        ++pos;
    }
    CHECK(panels == 5);

    // Every series polyline carries 336 points.
    pos = 0;
    std::size_t series = 0;
    while ((pos = svg.find("class=\"series\"", pos)) != std::string::npos) {
        const auto points = parse_points(svg, pos);
        CHECK(points.size() == 336);
        ++series;
        ++pos;
    }
    CHECK(series == 5);

    // The y tick labels carry the 45-degree rotation transform.
    CHECK(svg.find("transform=\"rotate(-45 ") != std::string::npos);

    // Label anchors sit inside the margin, left of their panel frame.
    pos = 0;
    while ((pos = svg.find("class=\"panel\"", pos)) != std::string::npos) {
        const std::size_t gend = svg.find("</g>", pos);
        const double px = attr_value(svg.substr(pos, 200), "data-x");
        std::size_t tick = svg.find("class=\"ytick\"", pos);
        while (tick != std::string::npos && tick < gend) {
            const double tx = attr_value(svg.substr(tick, 200), "x");
            CHECK(tx < px);
            tick = svg.find("class=\"ytick\"", tick + 1);
        }
        ++pos;
    }

    // A custom rotation flows through.
    viz::PlotSpec rotated = spec;
    rotated.layout.label_rotation_deg = 30;
    CHECK(viz::weather_panels(table, rotated).find("rotate(-30 ") != std::string::npos);

    // Single weather column yields a single panel.
    const viz::OutputTable one = viz::parse_output_csv(
        "Date/Time,Site Outdoor Air Drybulb Temperature [C](Hourly)\n 08/01  01:00:00,30\n");
    viz::PlotSpec tiny;
    tiny.window_start = viz::DateTime{8, 1, 0, 0, 0};
    tiny.window_end = viz::DateTime{8, 2, 0, 0, 0};
    CHECK(viz::weather_panels(one, tiny).find("data-panels=\"1\"") != std::string::npos);

    const viz::OutputTable no_weather = viz::parse_output_csv(
        "Date/Time,Cooling:Electricity [J](Hourly)\n 08/01  01:00:00,1\n");
    CHECK_THROWS_AS(viz::weather_panels(no_weather, tiny), viz::VizError);
}
