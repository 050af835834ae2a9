#include "bemflow/output_viz.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>
#include <utility>

#include "bemflow/text_util.hpp"

namespace bemflow::viz {

using text::trim;

namespace {

constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

// month 13 / day 1 is the internal "start of next year" instant that the
// last hour-24 row of December normalizes to.
int day_of_year(int month, int day) {
    int days = 0;
    for (int m = 1; m < month && m <= 12; ++m) days += kDaysInMonth[static_cast<std::size_t>(m - 1)];
    return days + day;
}

}  // namespace

long DateTime::minute_of_year() const {
    return (static_cast<long>(day_of_year(month, day)) - 1) * 24 * 60 + hour * 60L + minute;
}

DateTime parse_datetime(std::string_view s) {
    DateTime dt;
    const std::string cleaned = trim(s);
    int fields = std::sscanf(cleaned.c_str(), "%d/%d %d:%d:%d", &dt.month, &dt.day, &dt.hour,
                             &dt.minute, &dt.second);
    if (fields < 2)
        throw VizError(VizErrorKind::UnparseableTimestamp,
                       "cannot parse timestamp \"" + cleaned + "\"");
    if (fields < 5) {
        dt.hour = 0;
        dt.minute = 0;
        dt.second = 0;
    }
    if (dt.month < 1 || dt.month > 12 || dt.day < 1 ||
        dt.day > kDaysInMonth[static_cast<std::size_t>(dt.month - 1)])
        throw VizError(VizErrorKind::UnparseableTimestamp,
                       "timestamp out of range: \"" + cleaned + "\"");
    if (dt.hour == 24) {
        dt.hour = 0;
        dt.day += 1;
        if (dt.day > kDaysInMonth[static_cast<std::size_t>(dt.month - 1)]) {
            dt.day = 1;
            dt.month += 1;  // 12/31 24:00 becomes the month-13 next-year instant
        }
    }
    return dt;
}

std::pair<DateTime, DateTime> window_from_text(std::string_view start, std::string_view end) {
    const bool start_date_only = start.find(':') == std::string_view::npos;
    DateTime s = parse_datetime(start);
    if (start_date_only) s.hour = 1;
    const DateTime e = parse_datetime(end);
    return {s, e};
}

CategoryKeywords CategoryKeywords::defaults() {
    CategoryKeywords k;
    k.enduse = {"Heating",  "Cooling",        "InteriorLights", "ExteriorLights",
                "InteriorEquipment", "ExteriorEquipment", "Fans",    "Pumps",
                "HeatRejection",     "Humidification",    "HeatRecovery",
                "WaterSystems",      "Refrigeration",     "Generators"};
    k.weather = {"Site Outdoor", "Environment", "Site Wind", "Site Diffuse", "Site Direct",
                 "Site Solar"};
    return k;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            continue;
        }
        if (c == ',' && !quoted) {
            cells.push_back(cell);
            cell.clear();
            continue;
        }
        cell.push_back(c);
    }
    cells.push_back(cell);
    return cells;
}

Category infer_category(const std::string& name, const CategoryKeywords& keywords) {
    for (const auto& k : keywords.weather)
        if (name.find(k) != std::string::npos) return Category::Weather;
    for (const auto& k : keywords.enduse)
        if (name.find(k) != std::string::npos) return Category::EndUse;
    return Category::Other;
}

}  // namespace

OutputTable parse_output_csv(std::string_view csv_text, const CategoryKeywords& keywords) {
    const auto lines = text::split_lines(csv_text);
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    if (first >= lines.size())
        throw VizError(VizErrorKind::HeaderMissing, "CSV input has no header row");

    const auto header = split_csv_row(lines[first]);
    if (header.size() < 2 || !text::starts_with_ci(trim(header[0]), "Date"))
        throw VizError(VizErrorKind::HeaderMissing,
                       "first column must be Date/Time, got \"" + trim(header[0]) + "\"");

    OutputTable table;
    for (std::size_t i = 1; i < header.size(); ++i) {
        Column col;
        std::string h = trim(header[i]);
        // "Heating:Electricity [J](Hourly)" -> name, unit, frequency
        const std::size_t bracket = h.find('[');
        if (bracket != std::string::npos) {
            const std::size_t bracket_end = h.find(']', bracket);
            if (bracket_end != std::string::npos)
                col.unit = h.substr(bracket + 1, bracket_end - bracket - 1);
            const std::size_t paren = h.find('(', bracket);
            if (paren != std::string::npos) {
                const std::size_t paren_end = h.find(')', paren);
                if (paren_end != std::string::npos)
                    col.frequency = h.substr(paren + 1, paren_end - paren - 1);
            }
            col.name = trim(h.substr(0, bracket));
        } else {
            col.name = h;
        }
        col.category = infer_category(col.name, keywords);
        table.columns.push_back(std::move(col));
    }

    for (std::size_t row = first + 1; row < lines.size(); ++row) {
        if (trim(lines[row]).empty()) continue;
        const auto cells = split_csv_row(lines[row]);
        if (cells.size() != header.size())
            throw VizError(VizErrorKind::RaggedRow,
                           "row " + std::to_string(row + 1) + " has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header.size()));
        DateTime dt;
        try {
            dt = parse_datetime(cells[0]);
        } catch (const VizError& e) {
            throw VizError(VizErrorKind::UnparseableTimestamp,
                           std::string(e.what()) + " (row " + std::to_string(row + 1) + ")");
        }
        table.timestamps.push_back(dt);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            double v = 0.0;
            const std::string cell = trim(cells[i]);
            if (!cell.empty()) {
                try {
                    v = std::stod(cell);
                } catch (...) {
                    throw VizError(VizErrorKind::RaggedRow,
                                   "non-numeric cell \"" + cell + "\" at row " +
                                       std::to_string(row + 1));
                }
            }
            table.columns[i - 1].values.push_back(v);
        }
    }
    return table;
}

OutputTable select_window(const OutputTable& table, DateTime start, DateTime end) {
    if (!(start < end))
        throw VizError(VizErrorKind::BadWindow, "window start must precede window end");
    OutputTable out;
    out.columns = table.columns;
    for (auto& c : out.columns) c.values.clear();
    for (std::size_t i = 0; i < table.timestamps.size(); ++i) {
        const DateTime& t = table.timestamps[i];
        if (t < start || end < t) continue;
        out.timestamps.push_back(t);
        for (std::size_t j = 0; j < table.columns.size(); ++j)
            out.columns[j].values.push_back(table.columns[j].values[i]);
    }
    if (out.timestamps.empty())
        throw VizError(VizErrorKind::EmptyWindow, "no rows fall inside the window");
    return out;
}

namespace {

constexpr double kWidth = 1000.0;
constexpr double kHeight = 520.0;
constexpr double kMarginLeft = 90.0;
constexpr double kMarginRight = 220.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 60.0;

const std::array<const char*, 12> kPalette = {
    "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8b", "#c5b0d5"};

std::string fmt(double v) { return text::format_double(v); }

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string month_day(const DateTime& t) {
    std::ostringstream out;
    out << (t.month < 10 ? "0" : "") << t.month << "/" << (t.day < 10 ? "0" : "") << t.day;
    return out.str();
}

}  // namespace

std::string enduse_color(const std::string& column_name, std::size_t palette_index,
                         const std::map<std::string, std::string>& overrides) {
    for (const auto& [keyword, color] : overrides) {
        if (column_name.find(keyword) != std::string::npos) return color;
    }
    if (column_name.find("Heating") != std::string::npos) return "red";
    if (column_name.find("Cooling") != std::string::npos) return "blue";
    return kPalette[palette_index % kPalette.size()];
}

std::string enduse_stack_plot(const OutputTable& full_table, const PlotSpec& spec) {
    const OutputTable table = select_window(full_table, spec.window_start, spec.window_end);

    std::vector<const Column*> bands;
    for (const auto& c : table.columns)
        if (c.category == Category::EndUse) bands.push_back(&c);
    if (bands.empty())
        throw VizError(VizErrorKind::NoEnduseColumns, "no end-use columns inside the window");

    const std::size_t n = table.timestamps.size();
    // Cumulative stack; the global maximum fixes the y scale.
    std::vector<double> top(n, 0.0);
    double y_max = 0.0;
    for (const Column* c : bands)
        for (std::size_t i = 0; i < n; ++i) {
            top[i] += c->values[i];
            y_max = std::max(y_max, top[i]);
        }
    if (y_max <= 0.0) y_max = 1.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto x_at = [&](std::size_t i) {
        return n == 1 ? kMarginLeft + plot_w / 2
                      : kMarginLeft + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    auto y_at = [&](double v) { return kMarginTop + plot_h * (1.0 - v / y_max); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" data-kind=\"enduse-stack\" data-points=\"" << n << "\" data-ymax=\""
        << fmt(y_max) << "\" data-plot-x=\"" << fmt(kMarginLeft) << "\" data-plot-y=\""
        << fmt(kMarginTop) << "\" data-plot-w=\"" << fmt(plot_w) << "\" data-plot-h=\""
        << fmt(plot_h) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";

    const std::string unit = bands.front()->unit.empty() ? "J" : bands.front()->unit;
    const std::string title = spec.title.empty()
                                  ? "End-use energy, " + month_day(spec.window_start) + " to " +
                                        month_day(spec.window_end)
                                  : spec.title;
    svg << "<text class=\"title\" x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"16\">" << svg_escape(title) << "</text>\n";
    svg << "<text class=\"axis-label\" x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
        << kHeight - 14 << "\" text-anchor=\"middle\" font-size=\"12\">Date/Time</text>\n";
    svg << "<text class=\"axis-label\" x=\"20\" y=\"" << kMarginTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 20 "
        << kMarginTop + plot_h / 2 << ")\">Energy [" << svg_escape(unit) << "]</text>\n";

    // Bands, bottom of the stack first. Each polygon walks the band's upper
    // boundary left to right, then its lower boundary right to left.
    std::vector<double> lower(n, 0.0);
    std::size_t palette_index = 0;
    for (const Column* c : bands) {
        std::vector<double> upper(n);
        for (std::size_t i = 0; i < n; ++i) upper[i] = lower[i] + c->values[i];
        const std::string color = enduse_color(c->name, palette_index, spec.color_map);
        if (c->name.find("Heating") == std::string::npos &&
            c->name.find("Cooling") == std::string::npos)
            ++palette_index;
        svg << "<polygon class=\"band\" data-name=\"" << svg_escape(c->name) << "\" fill=\""
            << color << "\" fill-opacity=\"0.85\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) svg << " ";
            svg << fmt(x_at(i)) << "," << fmt(y_at(upper[i]));
        }
        for (std::size_t i = n; i-- > 0;) svg << " " << fmt(x_at(i)) << "," << fmt(y_at(lower[i]));
        svg << "\"/>\n";
        lower = std::move(upper);
    }

    // Axes.
    svg << "<line class=\"axis\" x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
        << "\" x2=\"" << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
        << "\" stroke=\"black\"/>\n";
    svg << "<line class=\"axis\" x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
        << kMarginLeft << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y_max * tick / 4.0;
        svg << "<text class=\"ytick\" x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(y_at(v) + 4)
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v) << "</text>\n";
    }
    const std::size_t x_ticks = std::min<std::size_t>(n, 8);
    for (std::size_t t = 0; t < x_ticks; ++t) {
        const std::size_t i = (n - 1) * t / std::max<std::size_t>(1, x_ticks - 1);
        svg << "<text class=\"xtick\" x=\"" << fmt(x_at(i)) << "\" y=\""
            << kMarginTop + plot_h + 18 << "\" text-anchor=\"middle\" font-size=\"10\">"
            << month_day(table.timestamps[i]) << "</text>\n";
    }

    // Legend.
    double ly = kMarginTop;
    palette_index = 0;
    for (const Column* c : bands) {
        const std::string color = enduse_color(c->name, palette_index, spec.color_map);
        if (c->name.find("Heating") == std::string::npos &&
            c->name.find("Cooling") == std::string::npos)
            ++palette_index;
        svg << "<rect class=\"legend-swatch\" x=\"" << kMarginLeft + plot_w + 16 << "\" y=\""
            << ly << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        svg << "<text class=\"legend\" x=\"" << kMarginLeft + plot_w + 34 << "\" y=\"" << ly + 10
            << "\" font-size=\"10\">" << svg_escape(c->name) << "</text>\n";
        ly += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string weather_panels(const OutputTable& full_table, const PlotSpec& spec) {
    const OutputTable table = select_window(full_table, spec.window_start, spec.window_end);

    std::vector<const Column*> panels;
    for (const auto& c : table.columns)
        if (c.category == Category::Weather) panels.push_back(&c);
    if (panels.empty())
        throw VizError(VizErrorKind::NoWeatherColumns, "no weather columns inside the window");

    const std::size_t n = table.timestamps.size();
    const std::size_t cols = panels.size() >= 4 ? 2 : 1;
    const std::size_t rows = (panels.size() + cols - 1) / cols;

    const double spacing = spec.layout.panel_spacing;
    const double panel_w = (kWidth - kMarginLeft - 40.0 - spacing * (cols - 1)) / cols;
    const double total_h = kMarginTop + rows * 160.0 + (rows - 1) * spacing + kMarginBottom;
    const double panel_h = 160.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << fmt(total_h) << "\" data-kind=\"weather-panels\" data-points=\"" << n
        << "\" data-panels=\"" << panels.size() << "\" data-label-rotation=\""
        << fmt(spec.layout.label_rotation_deg) << "\" data-panel-spacing=\"" << fmt(spacing)
        << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << fmt(total_h)
        << "\" fill=\"white\"/>\n";
    const std::string title = spec.title.empty()
                                  ? "Weather variables, " + month_day(spec.window_start) + " to " +
                                        month_day(spec.window_end)
                                  : spec.title;
    svg << "<text class=\"title\" x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"16\">" << svg_escape(title) << "</text>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const Column& c = *panels[p];
        const std::size_t row = p / cols;
        const std::size_t col = p % cols;
        const double px = kMarginLeft + col * (panel_w + spacing);
        const double py = kMarginTop + row * (panel_h + spacing);

        double v_min = c.values.empty() ? 0.0 : c.values.front();
        double v_max = v_min;
        for (double v : c.values) {
            v_min = std::min(v_min, v);
            v_max = std::max(v_max, v);
        }
        if (v_max == v_min) v_max = v_min + 1.0;

        auto x_at = [&](std::size_t i) {
            return n == 1 ? px + panel_w / 2
                          : px + panel_w * static_cast<double>(i) / static_cast<double>(n - 1);
        };
        auto y_at = [&](double v) { return py + panel_h * (1.0 - (v - v_min) / (v_max - v_min)); };

        svg << "<g class=\"panel\" data-name=\"" << svg_escape(c.name) << "\" data-x=\""
            << fmt(px) << "\" data-y=\"" << fmt(py) << "\" data-w=\"" << fmt(panel_w)
            << "\" data-h=\"" << fmt(panel_h) << "\">\n";
        svg << "<rect class=\"panel-frame\" x=\"" << fmt(px) << "\" y=\"" << fmt(py)
            << "\" width=\"" << fmt(panel_w) << "\" height=\"" << fmt(panel_h)
            << "\" fill=\"none\" stroke=\"#999\"/>\n";
        svg << "<text class=\"panel-title\" x=\"" << fmt(px + panel_w / 2) << "\" y=\""
            << fmt(py - 4) << "\" text-anchor=\"middle\" font-size=\"11\">" << svg_escape(c.name)
            << (c.unit.empty() ? "" : " [" + svg_escape(c.unit) + "]") << "</text>\n";

        svg << "<polyline class=\"series\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" "
            << "points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) svg << " ";
            svg << fmt(x_at(i)) << "," << fmt(y_at(c.values[i]));
        }
        svg << "\"/>\n";

        // Rotated y tick labels, anchored at the panel's left edge so the
        // rotation keeps them inside the margin.
        for (int tick = 0; tick <= 2; ++tick) {
            const double v = v_min + (v_max - v_min) * tick / 2.0;
            const double lx = px - 6;
            const double lyv = y_at(v);
            svg << "<text class=\"ytick\" x=\"" << fmt(lx) << "\" y=\"" << fmt(lyv)
                << "\" text-anchor=\"end\" font-size=\"" << fmt(spec.layout.label_font_size)
                << "\" transform=\"rotate(-" << fmt(spec.layout.label_rotation_deg) << " "
                << fmt(lx) << " " << fmt(lyv) << ")\">" << fmt(v) << "</text>\n";
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace bemflow::viz
