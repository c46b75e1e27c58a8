#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mwb/console.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Model workbench console"};
  std::vector<std::string> commands;
  std::string script;
  app.add_option("-c,--command", commands, "Run a command (repeatable, in order)");
  app.add_option("-s,--script", script, "Run commands from a file")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  mwb::Console console(std::cout, std::cerr);
  for (const std::string& c : commands) {
    if (int status = console.execute(c); status != mwb::kOk) return status;
  }
  if (!script.empty()) {
    std::ifstream in(script);
    if (int status = console.run(in); status != mwb::kOk) return status;
  }
  if (commands.empty() && script.empty()) return console.run(std::cin);
  return mwb::kOk;
}
