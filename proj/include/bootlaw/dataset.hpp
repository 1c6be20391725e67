#pragma once

#include <string>
#include <vector>

namespace bootlaw {

/// One observed training run.  d1/d2 are first/second-stage token counts,
/// n the parameter count.  Families that ignore a coordinate still carry it
/// here; validation against a family happens when a fit or prediction reads it.
struct RunRecord {
    double d1 = 0;
    double d2 = 0;
    double n = 0;
    double loss = 0;
    std::string tag;
};

struct Dataset {
    std::vector<RunRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

} // namespace bootlaw
