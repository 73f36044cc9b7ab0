#pragma once

#include "revlang/ir.hpp"

namespace revlang {

/// Replace every `~@routine` with the inverse of its matching `@routine`
/// block and splice routine bodies inline. Throws RevError(UnmatchedRoutine).
FunctionDef expand_routines(const FunctionDef& fdef);
Block expand_routines(const Block& block);

/// Statement-level inverse of routine-free code.
Statement invert_statement(const Statement& s);
Block invert_block(const Block& block);

/// ~f: same name and parameters, body inverted after routine expansion.
FunctionDef invert_function(const FunctionDef& fdef);
Program invert_program(const Program& program);

/// Instruction operator of the inverse update (`+=` and `-=` swap, `*=` and
/// `/=` swap, `xor=` is its own inverse).
InstrOp invert_op(InstrOp op);

}  // namespace revlang
