#pragma once

// The `semforge` command line, callable in-process.
//
//   semforge [--config FILE] [--mode live|record|replay] [--stylesheet CSS] <command>
//
//   split                      snippet table and validation warnings
//   prompt --snippet K         print the assembled extraction prompt
//   extract [--from K --to L]  LLM extraction into <out>/fnl/extracted.fnl
//   lint [FILE]                FNL diagnostics
//   diff OLD NEW               intervention summary of two FNL files
//   compile [FILE]             FNL into <out>/graph.kgt and graph.kgb
//   query "S P O"              statements matching a pattern, ? = wildcard
//   render                     <out>/doc.html with the tooltip layer
//   pipeline                   extract, lint gate, compile, render
//
// Exit codes: 0 success, 1 diagnostics or module errors, 2 usage or
// configuration errors.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace semforge::prompting {
class Transport;
}

namespace semforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name. A null transport means HTTP.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::shared_ptr<prompting::Transport> transport = nullptr);

}  // namespace semforge::cli
