#include "fdedep/csv.hpp"

#include "fdedep/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace fdedep {
namespace {

void put_number(std::ostream& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.write(buf, n);
}

std::string format17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> split_row(const std::string& line, std::size_t line_no) {
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t end = line.find(',', pos);
        if (end == std::string::npos) end = line.size();
        std::string cell = line.substr(pos, end - pos);
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        if (first == std::string::npos)
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": empty cell");
        cell = cell.substr(first, last - first + 1);
        char* stop = nullptr;
        const double v = std::strtod(cell.c_str(), &stop);
        if (stop != cell.c_str() + cell.size())
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        row.push_back(v);
        pos = end + 1;
    }
    return row;
}

} // namespace

void write_csv(std::ostream& out, const SampledFn& fn) {
    out << "t";
    for (std::size_t c = 1; c <= fn.dim(); ++c) out << ", x" << c;
    out << '\n';
    for (std::size_t i = 0; i < fn.size(); ++i) {
        put_number(out, fn.time(i));
        for (double v : fn.node(i)) {
            out << ", ";
            put_number(out, v);
        }
        out << '\n';
    }
}

std::string to_csv(const SampledFn& fn) {
    std::ostringstream os;
    write_csv(os, fn);
    return os.str();
}

SampledFn read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("csv: missing header");
    std::size_t line_no = 1;
    std::vector<double> times;
    std::vector<double> flat;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto row = split_row(line, line_no);
        if (row.size() < 2) throw InvalidArgument("csv line " + std::to_string(line_no) + ": too few columns");
        if (dim == 0) dim = row.size() - 1;
        if (row.size() != dim + 1)
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": column count changed");
        times.push_back(row[0]);
        flat.insert(flat.end(), row.begin() + 1, row.end());
    }
    if (times.empty()) throw InvalidArgument("csv: no data rows");
    const double t0 = times.front();
    if (times.size() == 1) return {t0, 1.0, dim, std::move(flat)};

    // Recover h so that t0 + i*h reprints to the stored times.
    const auto n = static_cast<double>(times.size() - 1);
    const double candidates[] = {times[1] - t0, (times.back() - t0) / n};
    for (double h : candidates) {
        bool exact = true;
        for (std::size_t i = 0; i < times.size() && exact; ++i)
            exact = format17(t0 + static_cast<double>(i) * h) == format17(times[i]);
        if (exact) return {t0, h, dim, std::move(flat)};
    }
    const double h = candidates[1];
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(t0 + static_cast<double>(i) * h - times[i]) > 1e-9 * std::max(1.0, std::abs(times[i])))
            throw InvalidArgument("csv: time column is not a uniform grid");
    }
    return {t0, h, dim, std::move(flat)};
}

SampledFn from_csv(const std::string& text) {
    std::istringstream is(text);
    return read_csv(is);
}

} // namespace fdedep
