//! Monitoring alarm: hit counting, the latch, and the password gate.

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{motion_ratio, DetectorConfig, MotionError, MotionMask, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlarmPhase {
    Idle,
    Monitoring,
    Alarm,
}

impl AlarmPhase {
    pub fn name(self) -> &'static str {
        match self {
            AlarmPhase::Idle => "IDLE",
            AlarmPhase::Monitoring => "MONITORING",
            AlarmPhase::Alarm => "ALARM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlarmEvent {
    AlarmRaised,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisarmRejection {
    WrongPassword,
    NotArmed,
}

/// Salted SHA-256 of the disarm password.
#[derive(Clone, PartialEq, Eq)]
pub struct PasswordDigest {
    salt: [u8; 16],
    digest: [u8; 32],
}

impl std::fmt::Debug for PasswordDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PasswordDigest(..)")
    }
}

impl PasswordDigest {
    pub fn new(password: &str) -> Self {
        let mut salt = [0u8; 16];
        rand::rng().fill_bytes(&mut salt);
        Self::with_salt(password, salt)
    }

    pub fn with_salt(password: &str, salt: [u8; 16]) -> Self {
        PasswordDigest {
            salt,
            digest: Self::hash(&salt, password),
        }
    }

    fn hash(salt: &[u8; 16], password: &str) -> [u8; 32] {
        Sha256::new()
            .chain_update(salt)
            .chain_update(password.as_bytes())
            .finalize()
            .into()
    }

    /// Constant-time comparison of digests.
    pub fn verify(&self, password: &str) -> bool {
        let candidate = Self::hash(&self.salt, password);
        candidate
            .iter()
            .zip(&self.digest)
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlarmState {
    pub phase: AlarmPhase,
    pub consecutive_hits: u32,
    password: PasswordDigest,
}

impl AlarmState {
    pub fn new(password: &str) -> Self {
        Self::with_digest(PasswordDigest::new(password))
    }

    pub fn with_digest(password: PasswordDigest) -> Self {
        AlarmState {
            phase: AlarmPhase::Idle,
            consecutive_hits: 0,
            password,
        }
    }

    /// Starts monitoring. Only leaves IDLE; other phases are unchanged.
    pub fn arm(&self) -> AlarmState {
        let mut next = self.clone();
        if next.phase == AlarmPhase::Idle {
            next.phase = AlarmPhase::Monitoring;
            next.consecutive_hits = 0;
        }
        next
    }

    /// Leaves MONITORING for IDLE. A raised alarm stays latched.
    pub fn stop_monitoring(&self) -> AlarmState {
        let mut next = self.clone();
        if next.phase == AlarmPhase::Monitoring {
            next.phase = AlarmPhase::Idle;
            next.consecutive_hits = 0;
        }
        next
    }

    pub fn step(&self, mask: &MotionMask, cfg: &DetectorConfig) -> Result<(AlarmState, Vec<AlarmEvent>)> {
        match self.phase {
            AlarmPhase::Idle => Err(MotionError::Phase(AlarmPhase::Idle)),
            AlarmPhase::Alarm => Ok((self.clone(), Vec::new())),
            AlarmPhase::Monitoring => {
                let mut next = self.clone();
                if motion_ratio(mask) >= cfg.min_ratio {
                    next.consecutive_hits += 1;
                } else {
                    next.consecutive_hits = 0;
                }
                if next.consecutive_hits >= cfg.persist_k {
                    next.consecutive_hits = cfg.persist_k;
                    next.phase = AlarmPhase::Alarm;
                    return Ok((next, vec![AlarmEvent::AlarmRaised]));
                }
                Ok((next, Vec::new()))
            }
        }
    }

    /// A correct password returns to IDLE from MONITORING or ALARM.
    pub fn disarm(&self, password: &str) -> std::result::Result<AlarmState, DisarmRejection> {
        if self.phase == AlarmPhase::Idle {
            return Err(DisarmRejection::NotArmed);
        }
        if !self.password.verify(password) {
            return Err(DisarmRejection::WrongPassword);
        }
        Ok(AlarmState {
            phase: AlarmPhase::Idle,
            consecutive_hits: 0,
            password: self.password.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_with(ones: usize) -> MotionMask {
        let bits = (0..10_000).map(|i| i < ones).collect();
        MotionMask::from_bits(100, 100, bits).unwrap()
    }

    fn monitoring() -> AlarmState {
        AlarmState::with_digest(PasswordDigest::with_salt("open sesame", [7; 16])).arm()
    }

    #[test]
    fn quiet_masks_keep_monitoring() {
        let cfg = DetectorConfig::default();
        let mut s = monitoring();
        for _ in 0..20 {
            let (next, events) = s.step(&mask_with(49), &cfg).unwrap();
            assert!(events.is_empty());
            s = next;
        }
        assert_eq!(s.phase, AlarmPhase::Monitoring);
    }

    #[test]
    fn two_hits_raise_once() {
        let cfg = DetectorConfig::default();
        let (s, e1) = monitoring().step(&mask_with(100), &cfg).unwrap();
        assert!(e1.is_empty());
        let (s, e2) = s.step(&mask_with(100), &cfg).unwrap();
        assert_eq!(e2, vec![AlarmEvent::AlarmRaised]);
        assert_eq!(s.phase, AlarmPhase::Alarm);
        assert_eq!(s.consecutive_hits, 2);
        let (s, e3) = s.step(&mask_with(10_000), &cfg).unwrap();
        assert!(e3.is_empty());
        assert_eq!(s.phase, AlarmPhase::Alarm);
    }

    #[test]
    fn miss_resets_hit_counter() {
        let cfg = DetectorConfig::default();
        let (s, _) = monitoring().step(&mask_with(100), &cfg).unwrap();
        let (s, _) = s.step(&mask_with(0), &cfg).unwrap();
        assert_eq!(s.consecutive_hits, 0);
        let (s, e) = s.step(&mask_with(100), &cfg).unwrap();
        assert!(e.is_empty());
        assert_eq!(s.phase, AlarmPhase::Monitoring);
    }

    #[test]
    fn idle_step_is_an_error() {
        let s = AlarmState::new("pw");
        assert_eq!(
            s.step(&mask_with(0), &DetectorConfig::default()),
            Err(MotionError::Phase(AlarmPhase::Idle))
        );
    }

    #[test]
    fn disarm_paths() {
        let cfg = DetectorConfig {
            persist_k: 1,
            ..Default::default()
        };
        let (alarm, _) = monitoring().step(&mask_with(100), &cfg).unwrap();
        assert_eq!(alarm.disarm("wrong"), Err(DisarmRejection::WrongPassword));
        assert_eq!(alarm.phase, AlarmPhase::Alarm);
        assert_eq!(alarm.disarm("open sesame").unwrap().phase, AlarmPhase::Idle);
        assert_eq!(monitoring().disarm("open sesame").unwrap().phase, AlarmPhase::Idle);
        assert_eq!(AlarmState::new("x").disarm("x"), Err(DisarmRejection::NotArmed));
    }

    #[test]
    fn random_salts_differ() {
        assert_ne!(PasswordDigest::new("same"), PasswordDigest::new("same"));
        assert!(PasswordDigest::new("same").verify("same"));
    }

    proptest! {
        #[test]
        fn alarm_latches(
            masks in proptest::collection::vec(0usize..10_000, 1..30),
            guesses in proptest::collection::vec("[a-z]{0,12}", 0..10),
        ) {
            let cfg = DetectorConfig { persist_k: 1, ..Default::default() };
            let (mut s, _) = monitoring().step(&mask_with(100), &cfg).unwrap();
            for (i, ones) in masks.into_iter().enumerate() {
                let (next, events) = s.step(&mask_with(ones), &cfg).unwrap();
                prop_assert!(events.is_empty());
                prop_assert_eq!(next.phase, AlarmPhase::Alarm);
                s = next;
                if let Some(g) = guesses.get(i) {
                    prop_assert!(s.disarm(g).is_err());
                }
            }
        }
    }
}
