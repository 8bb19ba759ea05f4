#include "turbkit/errors.hpp"
#include "turbkit/shear.hpp"

namespace turbkit {

RunResult burgers_run(const SimConfig& cfg, const SnapshotSink& sink) {
    if (cfg.dim != 1) throw ConfigError("burgers_run needs a 1D grid (dim = 1)");
    return run(cfg, sink);
}

}  // namespace turbkit
