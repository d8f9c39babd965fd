//! HTTP POST with exponential backoff, shared by the chat-completion and
//! embedding clients, plus a small counting semaphore for per-endpoint
//! concurrency limits.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Backoff schedule: `base_delay * factor^attempt`, scaled by a random factor
/// in `[1 - jitter, 1 + jitter]` and capped at `max_delay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_retries: u32,
    #[serde(with = "secs")]
    pub base_delay: Duration,
    pub factor: f64,
    pub jitter: f64,
    #[serde(with = "secs")]
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            jitter: 0.25,
            max_delay: Duration::from_secs(60),
        }
    }
}

impl RetryPolicy {
    pub fn delay_for(&self, attempt: u32) -> Duration {
        let nominal = self.base_delay.as_secs_f64() * self.factor.powi(attempt as i32);
        let scale = if self.jitter > 0.0 {
            1.0 + rand::rng().random_range(-self.jitter..=self.jitter)
        } else {
            1.0
        };
        Duration::from_secs_f64((nominal * scale).max(0.0)).min(self.max_delay)
    }
}

pub(crate) mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() || v < 0.0 {
            return Err(serde::de::Error::custom("duration must be a non-negative number of seconds"));
        }
        Ok(Duration::from_secs_f64(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum HttpFailure {
    Auth(u16),
    RateLimited,
    Server(u16),
    Client(u16, String),
    Transport(String),
}

/// POSTs `body` as JSON and returns the response body of the first 2xx reply.
///
/// Transport errors, 429 and 5xx are retried; every other status is final.
pub(crate) fn post_json(
    http: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &[u8],
    policy: &RetryPolicy,
) -> Result<String, HttpFailure> {
    let mut attempt = 0u32;
    loop {
        let mut request = http
            .post(url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_vec());
        if let Some(key) = api_key {
            request = request.bearer_auth(key);
        }
        let failure = match request.send() {
            Err(e) => HttpFailure::Transport(e.to_string()),
            Ok(response) => {
                let status = response.status().as_u16();
                match status {
                    200..=299 => {
                        return response
                            .text()
                            .map_err(|e| HttpFailure::Transport(e.to_string()))
                    }
                    401 | 403 => return Err(HttpFailure::Auth(status)),
                    429 => HttpFailure::RateLimited,
                    500..=599 => HttpFailure::Server(status),
                    _ => {
                        let text = response.text().unwrap_or_default();
                        return Err(HttpFailure::Client(status, text));
                    }
                }
            }
        };
        if attempt >= policy.max_retries {
            return Err(failure);
        }
        let delay = policy.delay_for(attempt);
        log::warn!(
            "POST {url} failed ({failure:?}), retry {}/{} in {delay:?}",
            attempt + 1,
            policy.max_retries
        );
        std::thread::sleep(delay);
        attempt += 1;
    }
}

/// Counting semaphore bounding in-flight requests per endpoint.
#[derive(Debug)]
pub(crate) struct Limiter {
    free: Mutex<usize>,
    cv: Condvar,
}

pub(crate) struct Permit<'a>(&'a Limiter);

impl Limiter {
    pub(crate) fn new(permits: usize) -> Self {
        Self {
            free: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    pub(crate) fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut free = self.0.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.0.cv.notify_one();
    }
}
