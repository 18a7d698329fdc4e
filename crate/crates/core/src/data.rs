//! Bundled word lists and tables.
//!
//! Every list here can be replaced by a file at the command line; these are the
//! defaults used when nothing else is supplied.

/// Definitional pairs as (female, male).
pub const DEFINITIONAL_PAIRS: [(&str, &str); 10] = [
    ("she", "he"),
    ("her", "his"),
    ("woman", "man"),
    ("Mary", "John"),
    ("herself", "himself"),
    ("daughter", "son"),
    ("mother", "father"),
    ("gal", "guy"),
    ("girl", "boy"),
    ("female", "male"),
];

pub const SMART_STOP_LIST: &str = include_str!("data/smart_stop.txt");

/// Single-token words referring to male people.
pub const MALE_ENTITIES: &str = include_str!("data/male_entities.txt");

/// Single-token words referring to female people.
pub const FEMALE_ENTITIES: &str = include_str!("data/female_entities.txt");

/// Occupations with the widest gender gap: (job, %female, %male).
pub const MALE_JOBS: [(&str, f64, f64); 10] = [
    ("stonemason", 0.7, 99.3),
    ("roofer", 1.9, 98.1),
    ("electrician", 2.2, 97.8),
    ("plumber", 2.7, 97.3),
    ("carpenter", 2.8, 97.2),
    ("firefighter", 3.3, 96.7),
    ("millwright", 5.0, 95.0),
    ("welder", 5.3, 94.7),
    ("machinist", 5.6, 94.4),
    ("driver", 6.7, 93.3),
];

pub const FEMALE_JOBS: [(&str, f64, f64); 10] = [
    ("hygienist", 96.0, 4.0),
    ("secretary", 93.2, 6.8),
    ("hairdresser", 92.3, 7.7),
    ("dietician", 92.1, 7.9),
    ("paralegal", 89.6, 10.4),
    ("receptionist", 89.3, 10.7),
    ("phlebotomist", 89.3, 10.7),
    ("maid", 89.0, 11.0),
    ("nurse", 88.9, 11.1),
    ("typist", 86.0, 14.0),
];

/// Agentic adjectives (spelling as in the source table).
pub const AGENCY: [&str; 15] = [
    "aggressive",
    "ambitious",
    "arrogant",
    "confident",
    "corageous",
    "critical",
    "decisive",
    "demanding",
    "hardworking",
    "independent",
    "possessive",
    "proud",
    "selfish",
    "strong",
    "stubborn",
];

pub const COMMUNION: [&str; 12] = [
    "affectionate",
    "compassionate",
    "emotional",
    "generous",
    "honest",
    "nurturing",
    "outgoing",
    "patient",
    "polite",
    "romantic",
    "sensitive",
    "unselfish",
];

pub const SCIENCE: [&str; 8] = [
    "astronomy",
    "chemistry",
    "Einstein",
    "experiment",
    "NASA",
    "physics",
    "science",
    "technology",
];

pub const ARTS: [&str; 8] = [
    "art",
    "dance",
    "drama",
    "literature",
    "novel",
    "poetry",
    "Shakespeare",
    "symphony",
];

pub const CAREER: [&str; 8] = [
    "business",
    "career",
    "corporation",
    "executive",
    "management",
    "office",
    "professional",
    "salary",
];

pub const FAMILY: [&str; 8] = [
    "children",
    "cousin",
    "family",
    "home",
    "marriage",
    "parents",
    "relatives",
    "wedding",
];

/// Iterates the non-empty, non-comment lines of a bundled or user word list.
pub fn word_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}
