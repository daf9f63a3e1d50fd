use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Paces callers so that successive permits are at least `1 / rate` apart,
/// i.e. a token bucket of capacity one.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    /// `per_second` must be positive and finite.
    pub fn new(per_second: f64) -> Self {
        assert!(per_second.is_finite() && per_second > 0.0, "rate must be positive");
        RateLimiter {
            interval: Duration::from_secs_f64(1.0 / per_second),
            next: Mutex::new(None),
        }
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    /// Blocks until the caller may proceed and returns the permit instant.
    pub fn acquire(&self) -> Instant {
        let slot = {
            let mut next = self.next.lock().expect("limiter lock");
            let now = Instant::now();
            let slot = match *next {
                Some(t) if t > now => t,
                _ => now,
            };
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
        slot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permits_are_spaced() {
        let l = RateLimiter::new(200.0);
        let times: Vec<Instant> = (0..10).map(|_| l.acquire()).collect();
        for w in times.windows(2) {
            assert!(w[1] - w[0] >= l.interval());
        }
    }

    #[test]
    fn shared_across_threads() {
        let l = RateLimiter::new(500.0);
        let mut all: Vec<Instant> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..4)
                .map(|_| s.spawn(|| (0..5).map(|_| l.acquire()).collect::<Vec<_>>()))
                .collect();
            hs.into_iter().flat_map(|h| h.join().unwrap()).collect()
        });
        all.sort();
        for w in all.windows(2) {
            assert!(w[1] - w[0] >= l.interval());
        }
    }
}
