#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bemflow::viz {

/// EnergyPlus output timestamps carry no year; hour 24 rows are normalized
/// onto the next day at 00:00.
struct DateTime {
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    long minute_of_year() const;
    auto operator<=>(const DateTime&) const = default;
};

/// Parse "MM/DD" or "MM/DD HH:MM:SS" (leading/extra spaces tolerated).
DateTime parse_datetime(std::string_view s);

/// Window bounds from user text. Hourly rows are labeled by the hour they
/// end, so a date-only start means that day's first row (01:00) and a
/// date-only end means that day's 00:00 row (the previous day's hour 24):
/// 01/01..01/08 covers exactly one week of hourly rows.
std::pair<DateTime, DateTime> window_from_text(std::string_view start, std::string_view end);

enum class Category { EndUse, Weather, Other };

struct Column {
    std::string name;       // header text before the bracket block
    std::string unit;       // from "[J]"
    std::string frequency;  // from "(Hourly)"
    Category category = Category::Other;
    std::vector<double> values;
};

struct OutputTable {
    std::vector<DateTime> timestamps;
    std::vector<Column> columns;
};

enum class VizErrorKind {
    HeaderMissing,
    RaggedRow,
    UnparseableTimestamp,
    EmptyWindow,
    NoEnduseColumns,
    NoWeatherColumns,
    BadWindow
};

class VizError : public std::runtime_error {
public:
    VizError(VizErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    VizErrorKind kind() const { return kind_; }

private:
    VizErrorKind kind_;
};

struct CategoryKeywords {
    std::vector<std::string> enduse;
    std::vector<std::string> weather;
    static CategoryKeywords defaults();
};

OutputTable parse_output_csv(std::string_view text,
                             const CategoryKeywords& keywords = CategoryKeywords::defaults());

/// Rows with start <= t <= end.
OutputTable select_window(const OutputTable& table, DateTime start, DateTime end);

struct Layout {
    double panel_spacing = 18.0;
    double label_rotation_deg = 45.0;
    double label_font_size = 8.0;
};

struct PlotSpec {
    enum class Kind { EnduseStack, WeatherPanels };
    Kind kind = Kind::EnduseStack;
    DateTime window_start;
    DateTime window_end;
    std::map<std::string, std::string> color_map;  // category keyword -> color
    Layout layout;
    std::string title;
};

/// Stacked area chart of every end-use column: one band per column,
/// cumulative stacking, heating red / cooling blue / fixed palette.
/// Output is SVG with machine-checkable geometry.
std::string enduse_stack_plot(const OutputTable& table, const PlotSpec& spec);

/// Grid of per-column line panels for the weather variables; y-labels are
/// rotated per the layout so they stay inside their panels.
std::string weather_panels(const OutputTable& table, const PlotSpec& spec);

/// Color for an end-use column name: "red" for heating, "blue" for cooling,
/// else a stable palette entry for `palette_index`.
std::string enduse_color(const std::string& column_name, std::size_t palette_index,
                         const std::map<std::string, std::string>& overrides = {});

}  // namespace bemflow::viz
