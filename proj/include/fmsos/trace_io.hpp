#pragma once

#include <fstream>
#include <iosfwd>
#include <string>

#include "fmsos/data_io.hpp"
#include "fmsos/model.hpp"
#include "fmsos/rjmcmc.hpp"

namespace fmsos {

inline constexpr const char* kTraceSchema = "fmsos-trace v1";
inline constexpr const char* kStateSchema = "fmsos-state v1";

// Trace layout, one item per line:
//   fmsos-trace v1
//   # key=value                        (resolved configuration)
//   dim <d> rotation_only <0|1>
//   r <iter> <kappa> <loglik> <move> <accepted> <lo> <hi> <k> <R row-major> <atoms> <psi>
//   stats <6 proposed counts> <6 accepted counts>
// Reals are written as hex floats so reading back is bit-exact.

/// Streams records as they are produced.
class TraceWriter {
public:
  TraceWriter(std::ostream& out, int dim, bool rotation_only, const Prologue& header);
  void append(const TraceRecord& record);
  void finish(const MoveStats& stats);

private:
  std::ostream& out_;
};

void write_trace(std::ostream& out, const ChainTrace& trace);
void write_trace(const std::string& path, const ChainTrace& trace);
/// ParseError kinds: SchemaMismatch, BadRecord.
ChainTrace read_trace(std::istream& in);
ChainTrace read_trace(const std::string& path);

void write_state(std::ostream& out, const ModelState& state, const Prologue& header = {});
void write_state(const std::string& path, const ModelState& state, const Prologue& header = {});
ModelState read_state(std::istream& in);
ModelState read_state(const std::string& path);

std::string hex_double(double v);

} // namespace fmsos
