//! The one JSON rendering used by both the CLI and the service, so the two
//! emit identical bytes for identical values.

use serde::Serialize;

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("engine types serialize infallibly");
    s.push('\n');
    s
}
