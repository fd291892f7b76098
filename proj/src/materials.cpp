#include "nucav/materials.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nucav/errors.hpp"

#ifndef NUCAV_DATA_DIR
#define NUCAV_DATA_DIR "data"
#endif

namespace nucav {

void Material::validate() const {
    if (!std::isfinite(delta) || !std::isfinite(beta))
        throw DomainError("material '" + name + "': non-finite optical constants");
    if (beta < 0.0) throw DomainError("material '" + name + "': beta must be >= 0");
    if (std::abs(delta) >= 1e-3)
        throw DomainError("material '" + name + "': |delta| must be < 1e-3");
}

Material vacuum() { return {"vacuum", 0.0, 0.0}; }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

double parse_number(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError(where + ": '" + s + "' is not a number");
    }
    if (used != s.size()) throw DomainError(where + ": '" + s + "' is not a number");
    return v;
}

}  // namespace

MaterialTable MaterialTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open materials file '" + path + "'");
    MaterialTable table;
    table.source_ = path;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto cells = split_csv(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (header) {
            if (cells.size() < 4 || cells[0] != "name" || cells[1] != "energy_eV" ||
                cells[2] != "delta" || cells[3] != "beta")
                throw DomainError(where + ": expected header name,energy_eV,delta,beta");
            header = false;
            continue;
        }
        if (cells.size() != 4) throw DomainError(where + ": expected 4 columns");
        Material m{cells[0], parse_number(cells[2], where), parse_number(cells[3], where)};
        m.validate();
        table.add(m, parse_number(cells[1], where));
    }
    if (table.materials_.empty()) throw DomainError("materials file '" + path + "' is empty");
    if (!table.contains("vacuum")) table.add(vacuum(), table.energy_eV_);
    return table;
}

std::string MaterialTable::default_path() {
    if (const char* env = std::getenv("NUCAV_MATERIALS"); env && *env) return env;
    return std::string(NUCAV_DATA_DIR) + "/materials.csv";
}

MaterialTable MaterialTable::load_default() { return load_csv(default_path()); }

void MaterialTable::add(const Material& m, double energy_eV) {
    if (!materials_.empty() && std::abs(energy_eV - energy_eV_) > 1e-6 * std::abs(energy_eV_))
        throw DomainError("material '" + m.name + "' tabulated at a different photon energy");
    energy_eV_ = energy_eV;
    materials_[m.name] = m;
}

bool MaterialTable::contains(const std::string& name) const { return materials_.count(name) > 0; }

const Material& MaterialTable::get(const std::string& name) const {
    const auto it = materials_.find(name);
    if (it == materials_.end()) {
        std::string known;
        for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
        throw DomainError("unknown material '" + name + "' (available: " + known + ")");
    }
    return it->second;
}

std::vector<std::string> MaterialTable::names() const {
    std::vector<std::string> out;
    for (const auto& [n, m] : materials_) out.push_back(n);
    return out;
}

}  // namespace nucav
