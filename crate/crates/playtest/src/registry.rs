//! Live and parked sessions, keyed by an opaque token.
//!
//! A session is either attached (its game loop is owned by one connection) or
//! parked in the registry waiting for a resume. Taking it out to attach is what
//! guarantees a single loop per session.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use skilldepth::seed;

use crate::session::Session;
use crate::{Error, Result};

enum Slot {
    Attached,
    Parked { session: Box<Session>, since: Instant },
}

pub struct Registry {
    slots: Mutex<HashMap<String, Slot>>,
    grace: Duration,
    salt: u64,
    counter: AtomicU64,
}

impl Registry {
    pub fn new(grace: Duration) -> Self {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        Self {
            slots: Mutex::new(HashMap::new()),
            grace,
            salt: nanos ^ u64::from(std::process::id()),
            counter: AtomicU64::new(0),
        }
    }

    /// Registers a new session as attached to the caller and returns its id.
    pub fn create(&self) -> String {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let id = format!("{:016x}", seed::derive(&[self.salt, n]));
        self.slots.lock().unwrap().insert(id.clone(), Slot::Attached);
        id
    }

    /// Takes a parked session for a reconnecting client.
    pub fn attach(&self, id: &str) -> Result<Session> {
        let mut slots = self.slots.lock().unwrap();
        Self::sweep_locked(&mut slots, self.grace);
        match slots.get_mut(id) {
            None => Err(Error::UnknownSession(id.to_string())),
            Some(Slot::Attached) => Err(Error::Busy(id.to_string())),
            Some(slot) => match std::mem::replace(slot, Slot::Attached) {
                Slot::Parked { session, .. } => Ok(*session),
                Slot::Attached => unreachable!(),
            },
        }
    }

    /// Returns a session whose client went away; it stays resumable for the grace period.
    pub fn park(&self, id: &str, session: Session) {
        self.slots.lock().unwrap().insert(
            id.to_string(),
            Slot::Parked {
                session: Box::new(session),
                since: Instant::now(),
            },
        );
    }

    pub fn close(&self, id: &str) {
        self.slots.lock().unwrap().remove(id);
    }

    pub fn len(&self) -> usize {
        self.slots.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_parked(&self, id: &str) -> bool {
        matches!(self.slots.lock().unwrap().get(id), Some(Slot::Parked { .. }))
    }

    /// Drops parked sessions older than the grace period; returns how many.
    pub fn sweep(&self) -> usize {
        Self::sweep_locked(&mut self.slots.lock().unwrap(), self.grace)
    }

    fn sweep_locked(slots: &mut HashMap<String, Slot>, grace: Duration) -> usize {
        let before = slots.len();
        slots.retain(|_, s| match s {
            Slot::Parked { since, .. } => since.elapsed() < grace,
            Slot::Attached => true,
        });
        before - slots.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SessionConfig;
    use skilldepth::params::{default_search_space, GameParams};

    fn session() -> Session {
        let g = GameParams::mid_range().encode().unwrap();
        Session::new(&g, &default_search_space(), 1, None, 1, &SessionConfig::default()).unwrap()
    }

    #[test]
    fn ids_are_distinct() {
        let r = Registry::new(Duration::from_secs(5));
        let ids: std::collections::HashSet<String> = (0..100).map(|_| r.create()).collect();
        assert_eq!(ids.len(), 100);
        assert_eq!(r.len(), 100);
    }

    #[test]
    fn park_and_resume_once() {
        let r = Registry::new(Duration::from_secs(5));
        let id = r.create();
        assert!(matches!(r.attach(&id), Err(Error::Busy(_))));
        r.park(&id, session());
        assert!(r.is_parked(&id));
        let s = r.attach(&id).unwrap();
        assert_eq!(s.tick(), 0);
        assert!(matches!(r.attach(&id), Err(Error::Busy(_))));
        r.close(&id);
        assert!(matches!(r.attach(&id), Err(Error::UnknownSession(_))));
    }

    #[test]
    fn parked_sessions_expire() {
        let r = Registry::new(Duration::ZERO);
        let id = r.create();
        r.park(&id, session());
        assert_eq!(r.sweep(), 1);
        assert!(r.is_empty());
    }

    #[test]
    fn concurrent_creates_are_safe() {
        let r = std::sync::Arc::new(Registry::new(Duration::from_secs(5)));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let r = r.clone();
                std::thread::spawn(move || (0..50).map(|_| r.create()).collect::<Vec<_>>())
            })
            .collect();
        let all: std::collections::HashSet<String> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
        assert_eq!(all.len(), 400);
    }
}
