#ifndef BIASREDUCE_LOG_HPP_
#define BIASREDUCE_LOG_HPP_

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace biasreduce {
namespace log {

enum class Level { error = 0, info = 1, debug = 2 };

// Verbosity comes from the BIASREDUCE_LOG environment variable
// (error|info|debug); everything goes to standard error only, so data files
// and stdout stay clean.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("BIASREDUCE_LOG");
    if (env == nullptr) return Level::info;
    const std::string v(env);
    if (v == "error") return Level::error;
    if (v == "debug") return Level::debug;
    return Level::info;
  }();
  return level;
}

inline std::mutex& mutex() {
  static std::mutex m;
  return m;
}

inline void write(Level level, const std::string& msg) {
  if (level > threshold()) return;
  const char* tag = level == Level::error  ? "error"
                    : level == Level::info ? "info"
                                           : "debug";
  std::lock_guard<std::mutex> lock(mutex());
  std::cerr << "[biasreduce:" << tag << "] " << msg << "\n";
}

inline void error(const std::string& msg) { write(Level::error, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void debug(const std::string& msg) { write(Level::debug, msg); }

}  // namespace log
}  // namespace biasreduce

#endif  // BIASREDUCE_LOG_HPP_
