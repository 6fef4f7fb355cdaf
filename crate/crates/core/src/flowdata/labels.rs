use super::{FlowRecord, Profile};
use crate::error::{Error, Result};

const IDS2017_RULES: &str = include_str!("rules/ids2017.rules");
const IDS2018_RULES: &str = include_str!("rules/ids2018.rules");

#[derive(Clone, Debug, PartialEq, Eq)]
enum Target {
    Class(usize),
    Drop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rule {
    pattern: String,
    target: Target,
}

/// Ordered raw-label rules mapping dataset spellings onto canonical classes.
///
/// The rule text is kept verbatim so a trained model can embed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    profile: Profile,
    classes: Vec<String>,
    rules: Vec<Rule>,
    source: String,
}

/// Lower-cases and folds every run of non-alphanumeric characters into a
/// single space.
pub fn normalize_label(raw: &str) -> String {
    fold(raw, false)
}

fn fold(raw: &str, keep_star: bool) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        if ch.is_alphanumeric() || (keep_star && ch == '*') {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

fn glob_match(pattern: &[u8], text: &[u8]) -> bool {
    let (mut p, mut t) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while t < text.len() {
        if p < pattern.len() && pattern[p] == b'*' {
            star = Some((p, t));
            p += 1;
        } else if p < pattern.len() && pattern[p] == text[t] {
            p += 1;
            t += 1;
        } else if let Some((sp, st)) = star {
            p = sp + 1;
            t = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    pattern[p..].iter().all(|&c| c == b'*')
}

impl LabelMap {
    /// Bundled rules for a dataset profile. `Custom` has no bundled rules.
    pub fn for_profile(profile: Profile) -> Result<Self> {
        match profile {
            Profile::Ids2017 => Self::parse(IDS2017_RULES, profile),
            Profile::Ids2018 => Self::parse(IDS2018_RULES, profile),
            Profile::Custom => Err(Error::Config(
                "the custom profile needs an explicit label rules file".into(),
            )),
        }
    }

    pub fn parse(text: &str, profile: Profile) -> Result<Self> {
        let mut classes: Option<Vec<String>> = None;
        let mut rules = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Config(format!("label rules line {}: {msg}", n + 1));
            if let Some(rest) = line.strip_prefix("classes:") {
                if classes.is_some() {
                    return Err(bad("classes declared twice"));
                }
                let list: Vec<String> = rest
                    .split(',')
                    .map(|c| c.trim().to_string())
                    .filter(|c| !c.is_empty())
                    .collect();
                if list.is_empty() {
                    return Err(bad("empty class list"));
                }
                classes = Some(list);
                continue;
            }
            let declared = classes
                .as_ref()
                .ok_or_else(|| bad("rule before the classes: line"))?;
            let (pattern, target) = line
                .split_once("=>")
                .ok_or_else(|| bad("expected `pattern => Class`"))?;
            let pattern = fold(pattern, true);
            if pattern.is_empty() {
                return Err(bad("empty pattern"));
            }
            let target = target.trim();
            let target = if target == "-" {
                Target::Drop
            } else {
                let idx = declared
                    .iter()
                    .position(|c| c == target)
                    .ok_or_else(|| bad(&format!("target {target:?} is not a declared class")))?;
                Target::Class(idx)
            };
            rules.push(Rule { pattern, target });
        }
        let classes = classes.ok_or_else(|| Error::Config("label rules lack a classes: line".into()))?;
        Ok(LabelMap {
            profile,
            classes,
            rules,
            source: text.to_string(),
        })
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Canonical class names in declaration order.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Rule text this map was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Canonical class index, `None` for labels a rule drops. A label that
    /// spells a canonical class name maps to that class before any rule.
    pub fn classify(&self, raw: &str) -> Result<Option<usize>> {
        let norm = normalize_label(raw);
        if let Some(i) = self.classes.iter().position(|c| normalize_label(c) == norm) {
            return Ok(Some(i));
        }
        self.rules
            .iter()
            .find(|r| glob_match(r.pattern.as_bytes(), norm.as_bytes()))
            .map(|r| match r.target {
                Target::Class(i) => Some(i),
                Target::Drop => None,
            })
            .ok_or_else(|| Error::UnknownLabel(raw.to_string()))
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }
}

/// Maps each record's raw label; `None` marks rows dropped by rule.
pub fn map_labels(records: &[FlowRecord], map: &LabelMap) -> Result<Vec<Option<usize>>> {
    records.iter().map(|r| map.classify(r.raw_label())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(map: &LabelMap, raw: &str) -> Option<String> {
        map.classify(raw).unwrap().map(|i| map.classes()[i].clone())
    }

    #[test]
    fn ids2017_spellings() {
        let m = LabelMap::for_profile(Profile::Ids2017).unwrap();
        let cases = [
            ("BENIGN", "Benign"),
            ("DoS Hulk", "DoS"),
            ("DoS GoldenEye", "DoS"),
            ("DoS slowloris", "DoS"),
            ("DoS Slowhttptest", "DoS"),
            ("DDoS", "DDoS"),
            ("PortScan", "Portscan"),
            ("Bot", "Bot"),
            ("FTP-Patator", "Brute Force"),
            ("SSH-Patator", "Brute Force"),
            ("Web Attack \u{FFFD} Brute Force", "Web"),
            ("Web Attack \u{2013} XSS", "Web"),
            ("Web Attack - Sql Injection", "Web"),
        ];
        for (raw, want) in cases {
            assert_eq!(name(&m, raw).as_deref(), Some(want), "{raw}");
        }
        assert_eq!(m.classify("Heartbleed").unwrap(), None);
    }

    #[test]
    fn ids2018_spellings() {
        let m = LabelMap::for_profile(Profile::Ids2018).unwrap();
        let cases = [
            ("Benign", "Benign"),
            ("DDOS attack-HOIC", "DDoS"),
            ("DDoS attacks-LOIC-HTTP", "DDoS"),
            ("DoS attacks-Hulk", "DoS"),
            ("DoS attacks-SlowHTTPTest", "DoS"),
            ("FTP-BruteForce", "Brute Force"),
            ("SSH-Bruteforce", "Brute Force"),
            ("Brute Force -Web", "Web"),
            ("Brute Force -XSS", "Web"),
            ("SQL Injection", "Web"),
            ("Infilteration", "Infiltration"),
        ];
        for (raw, want) in cases {
            assert_eq!(name(&m, raw).as_deref(), Some(want), "{raw}");
        }
    }

    #[test]
    fn canonical_sets() {
        let a = LabelMap::for_profile(Profile::Ids2017).unwrap();
        assert_eq!(
            a.classes(),
            ["Benign", "DoS", "DDoS", "Web", "Portscan", "Bot", "Brute Force"]
        );
        let b = LabelMap::for_profile(Profile::Ids2018).unwrap();
        assert_eq!(
            b.classes(),
            ["Benign", "DoS", "DDoS", "Web", "Portscan", "Brute Force", "Infiltration"]
        );
    }

    #[test]
    fn canonical_names_map_to_themselves() {
        for profile in [Profile::Ids2017, Profile::Ids2018] {
            let map = LabelMap::for_profile(profile).unwrap();
            for (i, class) in map.classes().iter().enumerate() {
                assert_eq!(map.classify(class).unwrap(), Some(i), "{profile} {class}");
            }
        }
    }

    #[test]
    fn unknown_label_lists_text() {
        let m = LabelMap::for_profile(Profile::Ids2017).unwrap();
        match m.classify("FooAttack") {
            Err(Error::UnknownLabel(t)) => assert_eq!(t, "FooAttack"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn glob() {
        assert!(glob_match(b"dos*", b"dos hulk"));
        assert!(glob_match(b"*scan", b"portscan"));
        assert!(glob_match(b"a*c*e", b"abcde"));
        assert!(!glob_match(b"dos*", b"ddos"));
        assert!(!glob_match(b"bot", b"bots"));
    }

    #[test]
    fn parse_rejects_undeclared_target() {
        assert!(LabelMap::parse("classes: A\nx => B\n", Profile::Custom).is_err());
        assert!(LabelMap::parse("x => A\n", Profile::Custom).is_err());
        let m = LabelMap::parse("classes: A, B\nx* => B\n", Profile::Custom).unwrap();
        assert_eq!(m.classify("X-ray").unwrap(), Some(1));
    }
}
