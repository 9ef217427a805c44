#pragma once

#include <string>

namespace cca {

/// Plot-ready extracts from a trace CSV + sidecar pair.
/// kind "displacement-time": per-vehicle longitudinal arc position along the
///   ego route vs. time (columns time_s, s_<id>...).
/// kind "path-xy": tidy series CSV (series,x,y) with the original path, the
///   deformed path dumps, obstacle footprints, and the driven ego path.
/// Throws UnknownKind for any other kind and ParseError on corrupt traces;
/// no output file is written in either case.
void write_plot_data(const std::string& trace_csv, const std::string& kind,
                     const std::string& out_csv);

}  // namespace cca
