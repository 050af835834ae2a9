#include "synthetic_csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bemflow::testsupport {

namespace {

constexpr int kDaysInMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::string synthetic_annual_csv() {
    std::ostringstream out;
    out << "Date/Time,"
        << "Heating:Electricity [J](Hourly),"
        << "Cooling:Electricity [J](Hourly),"
        << "InteriorLights:Electricity [J](Hourly),"
        << "InteriorEquipment:Electricity [J](Hourly),"
        << "ExteriorLights:Electricity [J](Hourly),"
        << "Fans:Electricity [J](Hourly),"
        << "Environment:Site Outdoor Air Drybulb Temperature [C](Hourly),"
        << "Environment:Site Outdoor Air Wetbulb Temperature [C](Hourly),"
        << "Environment:Site Outdoor Air Relative Humidity [%](Hourly),"
        << "Environment:Site Wind Speed [m/s](Hourly),"
        << "Environment:Site Direct Solar Radiation Rate per Area [W/m2](Hourly)\n";

    char buf[512];
    int day_of_year = 0;
    for (int month = 1; month <= 12; ++month) {
        for (int day = 1; day <= kDaysInMonth[month - 1]; ++day) {
            ++day_of_year;
            for (int hour = 1; hour <= 24; ++hour) {
                const double season = std::cos(2.0 * kPi * (day_of_year - 15) / 365.0);
                const double diurnal = std::sin(2.0 * kPi * (hour - 6) / 24.0);
                const double temp = 22.0 - 14.0 * season + 6.0 * diurnal;
                const bool business = hour >= 8 && hour <= 18;

                const double heating = std::max(0.0, (16.0 - temp)) * 2.4e6;
                const double cooling = std::max(0.0, (temp - 24.0)) * 3.1e6;
                const double lights = business ? 5.2e6 : 1.1e6;
                const double equipment = business ? 4.4e6 : 2.0e6;
                const double ext_lights = (hour <= 6 || hour >= 19) ? 1.9e6 : 0.0;
                const double fans = 0.9e6 + (heating + cooling) * 0.05;

                const double wetbulb = temp - 3.5 - 1.5 * diurnal;
                const double humidity = 52.0 + 18.0 * season - 8.0 * diurnal;
                const double wind = 3.2 + 1.9 * std::sin(2.0 * kPi * (hour + day) / 31.0);
                const double solar =
                    (hour >= 7 && hour <= 19)
                        ? std::max(0.0, 820.0 * std::sin(kPi * (hour - 7) / 12.0) *
                                            (1.0 - 0.55 * season))
                        : 0.0;

                std::snprintf(buf, sizeof(buf),
                              " %02d/%02d  %02d:00:00,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,"
                              "%.3f,%.3f,%.3f,%.3f,%.3f\n",
                              month, day, hour, heating, cooling, lights, equipment, ext_lights,
                              fans, temp, wetbulb, humidity, wind, solar);
                out << buf;
            }
        }
    }
    return out.str();
}

}  // namespace bemflow::testsupport
