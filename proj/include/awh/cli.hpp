#pragma once

namespace awh {

// Batch front-end. argv follows main() conventions (argv[0] = program name).
// Exit codes: 0 success, 1 verification failure (inadmissible verdict from
// `validate`, failed residual from `verify`), 2 inadmissible input,
// 3 numerical singularity.
int run(int argc, const char* const* argv);

}  // namespace awh
