#pragma once

// CSV emission. Every file starts with one '#' metadata line
// ("# delaybounds version=... kind=... config_hash=... key=value ..."),
// then a column header. Numbers use the shortest round-trip form.

#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "delaybounds/bounds.hpp"
#include "delaybounds/cascade.hpp"
#include "delaybounds/domain.hpp"

namespace dbounds {

using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string format_number(double x);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const Metadata& meta, const std::vector<std::string>& columns);

    CsvWriter& cell(double x);
    CsvWriter& cell(const std::string& s);
    CsvWriter& cell(std::size_t v);
    void end_row();

private:
    std::ostream& out_;
    bool first_ = true;
};

void write_trajectory_csv(std::ostream& out, const Metadata& meta, const Trajectory& x);
void write_cascade_csv(std::ostream& out, const Metadata& meta, const CascadeResult& res);
void write_bounds_csv(std::ostream& out, const Metadata& meta, const BoundTrace& trace);
void write_boundary_csv(std::ostream& out, const Metadata& meta, const BoundaryEstimate& est);
void write_projection_csv(std::ostream& out, const Metadata& meta, const BoundaryEstimate& est);

// Parsed CSV file as produced above.
struct CsvTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace dbounds
