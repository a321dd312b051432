/* holotable C API. All strings are UTF-8 and NUL-terminated. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * ht_string_free. On failure a function returns a non-zero ht_status and
 * ht_last_error() describes it (per thread, valid until the next call). */
#ifndef HOLOTABLE_H
#define HOLOTABLE_H

#include <stdint.h>

#if defined(HOLOTABLE_BUILDING)
#define HT_API __attribute__((visibility("default")))
#else
#define HT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define HT_API_VERSION 1

typedef enum ht_status {
  HT_OK = 0,
  HT_ERR_ARGUMENT = 1, /* null pointer, malformed JSON */
  HT_ERR_CONFIG = 2,   /* JSON parsed but violates a constraint */
  HT_ERR_IO = 3,       /* bind failure, log files */
  HT_ERR_CONNECT = 4,  /* server unreachable */
  HT_ERR_DENIED = 5,   /* wrong PIN, admin slot taken */
  HT_ERR_LOCKED = 6,   /* admin lockout in force */
  HT_ERR_PROTOCOL = 7, /* unexpected reply or closed connection */
  HT_ERR_STATE = 8,    /* call out of order, e.g. run before start */
  HT_ERR_INTERNAL = 9
} ht_status;

typedef struct ht_server ht_server;
typedef struct ht_admin ht_admin;

HT_API int ht_api_version(void);
HT_API const char* ht_status_string(ht_status status);
HT_API const char* ht_last_error(void);
HT_API void ht_string_free(char* s);

/* Server. config_json may be NULL or "{}" for defaults. Keys: bind, port,
 * pin, seats, sb, bb, stack, timeout (seconds), seed, spawn_clients, log_dir,
 * lockout {max_attempts, lock_seconds}, min_players, max_hands, rebuy,
 * seat_stacks, client_exe. */
HT_API ht_status ht_server_create(const char* config_json, ht_server** out);
HT_API ht_status ht_server_start(ht_server* server, int* port_out);
/* Blocks until the table shuts down or ht_server_stop is called. */
HT_API ht_status ht_server_run(ht_server* server);
/* Safe from any thread, including while ht_server_run blocks. */
HT_API ht_status ht_server_stop(ht_server* server);
/* {"bind", "port", "events_log", "server_log", "config"} */
HT_API ht_status ht_server_info(ht_server* server, char** info_json);
HT_API void ht_server_destroy(ht_server* server);

/* Admin session. HT_ERR_DENIED / HT_ERR_LOCKED carry the server's reason. */
HT_API ht_status ht_admin_connect(const char* host, int port, const char* pin, ht_admin** out);
/* args_json may be NULL. result_json receives {"ok": bool, "detail": {...}}. */
HT_API ht_status ht_admin_command(ht_admin* admin, const char* cmd, const char* args_json, char** result_json);
HT_API void ht_admin_close(ht_admin* admin);
/* Interactive shell on stdin/stdout. *exit_code receives the process status. */
HT_API ht_status ht_admin_shell(const char* host, int port, const char* pin, int* exit_code);

/* Seat bot. script_json follows the bot script format; NULL plays check/fold.
 * Blocks until the session ends. result_json receives {"exit_code", "seat",
 * "prompts", "rejected", "own_timeouts", "hands", "error"}. */
HT_API ht_status ht_bot_run(const char* host, int port, const char* script_json, char** result_json,
                            int* exit_code);

/* Self-play. sim_json: {"hands", "bots" (e.g. "random:6"), "seed", "sb", "bb",
 * "stack", "timeout", "log_dir"}. report_json receives the sim report. */
HT_API ht_status ht_sim_run(const char* sim_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
