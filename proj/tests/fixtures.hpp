#pragma once

#include <memory>
#include <string>

#include "tabattr/agents.hpp"
#include "tabattr/table.hpp"

namespace fixtures {

// Renewable-energy example table.
inline tabattr::Table energy_table() {
    return tabattr::Table(
        {"Source", "Cost", "Efficiency", "Scalability"},
        {{"Solar Power", "30–50", "15–20", "4"},
         {"Wind Power", "20–40", "30–45", "5"},
         {"Hydropower", "40–70", "70–90", "3"},
         {"Geothermal", "50–80", "90+", "2"}});
}

inline std::string energy_question() {
    return "Among renewable sources costing <= 50/MWh and scalability >= 3, which is most "
           "efficient, and what is its efficiency?";
}

inline std::string energy_answer() { return "Wind Power, 30–45% efficiency."; }

inline tabattr::QAInstance energy_instance() {
    tabattr::QAInstance inst{"energy-0001",
                             tabattr::Dataset::Other,
                             energy_table(),
                             energy_question(),
                             energy_answer(),
                             {},
                             tabattr::Split::Gold};
    tabattr::GoldGroup wind;
    wind.phrase = tabattr::PhraseSpan{0, 10, "Wind Power"};
    wind.cells = {{1, 0}};
    tabattr::GoldGroup eff;
    eff.phrase = tabattr::PhraseSpan{12, 20, "30–45%"};
    eff.cells = {{1, 2}};
    tabattr::GoldGroup implicit;  // cost and scalability filter evidence
    implicit.cells = {{0, 1}, {1, 1}, {0, 3}, {1, 3}};
    inst.gold = {wind, eff, implicit};
    return inst;
}

// Filmography table with the noisy silver attribution set.
inline tabattr::Table film_table() {
    return tabattr::Table(
        {"Year", "Film", "Role", "Language"},
        {{"2002", "Yathrakarude Sradakku", "--", "Malayalam"},
         {"2012", "Kadhalil Sodhapuvadhu Yeppadi", "Cathy", "Tamil"},
         {"2012", "Love Failure", "Cathy", "Telugu"},
         {"2012", "Nanban", "Jeeva's Wife", "Tamil"},
         {"2012", "Pizza", "Smitha", "Tamil"},
         {"2013", "Swamy Ra Ra", "Bhanu", "Telugu"}});
}

inline tabattr::AttributionSet film_noisy_pred() {
    return {{2, 0}, {2, 1}, {2, 2}, {3, 0}, {3, 1}, {3, 2}, {3, 3}, {5, 0}, {5, 1}};
}

inline tabattr::AttributionSet film_gold() {
    return {{2, 1}, {2, 2}, {3, 1}, {3, 2}, {3, 3}};
}

}  // namespace fixtures
