#include "eventrec/corpus.hpp"

#include <cstdio>

namespace eventrec {

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  int hour = 0;
  int minute = 0;
  int second = 0;
  int consumed = 0;
  const std::string buffer(text);
  const int fields = std::sscanf(buffer.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%n", &year, &month, &day,
                                 &hour, &minute, &second, &consumed);
  if (fields != 6) return std::nullopt;
  const std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z")) return std::nullopt;
  const std::chrono::year_month_day date{std::chrono::year{year}, std::chrono::month{month},
                                         std::chrono::day{day}};
  if (!date.ok() || hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 60) {
    return std::nullopt;
  }
  return std::chrono::sys_days{date} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         std::chrono::seconds{second};
}

std::string format_timestamp(Timestamp t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day date{days};
  const std::chrono::hh_mm_ss time{t - days};
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                static_cast<int>(time.hours().count()), static_cast<int>(time.minutes().count()),
                static_cast<int>(time.seconds().count()));
  return buffer;
}

std::string_view to_string(EventSource source) noexcept {
  switch (source) {
    case EventSource::ticket_service: return "ticket_service";
    case EventSource::newspaper: return "newspaper";
    case EventSource::both: return "both";
    case EventSource::synthetic: return "synthetic";
  }
  return "synthetic";
}

std::optional<EventSource> parse_event_source(std::string_view text) noexcept {
  if (text == "ticket_service") return EventSource::ticket_service;
  if (text == "newspaper") return EventSource::newspaper;
  if (text == "both") return EventSource::both;
  if (text == "synthetic") return EventSource::synthetic;
  return std::nullopt;
}

}  // namespace eventrec
