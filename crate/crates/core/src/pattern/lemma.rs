//! Rule-based lemmatizer: an exception table followed by ordered suffix rules,
//! iterated to a fixed point so that `lemmatize(lemmatize(t)) == lemmatize(t)`.

use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

/// Irregular forms and protected words. Every right-hand side is a fixed point
/// of the suffix rules (checked by a unit test).
const EXCEPTIONS: &[(&str, &str)] = &[
    // be / have / do / go
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("being", "be"), ("has", "have"), ("had", "have"), ("having", "have"), ("does", "do"),
    ("did", "do"), ("done", "do"), ("doing", "do"), ("goes", "go"), ("went", "go"), ("gone", "go"),
    ("going", "go"),
    // irregular verbs
    ("made", "make"), ("making", "make"), ("makes", "make"), ("took", "take"), ("taken", "take"),
    ("taking", "take"), ("got", "get"), ("gotten", "get"), ("getting", "get"), ("gave", "give"),
    ("given", "give"), ("giving", "give"), ("saw", "see"), ("seen", "see"), ("seeing", "see"),
    ("came", "come"), ("coming", "come"), ("knew", "know"), ("known", "know"),
    ("thought", "think"), ("said", "say"), ("says", "say"), ("told", "tell"), ("found", "find"),
    ("felt", "feel"), ("left", "leave"), ("leaving", "leave"), ("brought", "bring"),
    ("bought", "buy"), ("taught", "teach"), ("caught", "catch"), ("fought", "fight"),
    ("sought", "seek"), ("sold", "sell"), ("sent", "send"), ("spent", "spend"), ("built", "build"),
    ("lost", "lose"), ("losing", "lose"), ("met", "meet"), ("paid", "pay"), ("led", "lead"),
    ("ran", "run"), ("won", "win"), ("began", "begin"), ("begun", "begin"), ("beginning", "begin"),
    ("wrote", "write"), ("written", "write"), ("writing", "write"), ("spoke", "speak"),
    ("spoken", "speak"), ("broke", "break"), ("broken", "break"), ("chose", "choose"),
    ("chosen", "choose"), ("choosing", "choose"), ("drove", "drive"), ("driven", "drive"),
    ("driving", "drive"), ("ate", "eat"), ("eaten", "eat"), ("fell", "fall"), ("fallen", "fall"),
    ("forgot", "forget"), ("forgotten", "forget"), ("grew", "grow"), ("grown", "grow"),
    ("held", "hold"), ("kept", "keep"), ("slept", "sleep"), ("stood", "stand"),
    ("understood", "understand"), ("sat", "sit"), ("swam", "swim"), ("sang", "sing"),
    ("sung", "sing"), ("drank", "drink"), ("wore", "wear"), ("worn", "wear"), ("hid", "hide"),
    ("hidden", "hide"), ("rode", "ride"), ("rose", "rise"), ("risen", "rise"), ("stole", "steal"),
    ("stolen", "steal"), ("threw", "throw"), ("thrown", "throw"), ("flew", "fly"), ("flown", "fly"),
    ("drew", "draw"), ("drawn", "draw"), ("shown", "show"), ("became", "become"),
    ("becoming", "become"), ("meant", "mean"), ("heard", "hear"), ("dealt", "deal"),
    ("learnt", "learn"), ("lying", "lie"), ("dying", "die"), ("tying", "tie"),
    // -e verbs the suffix rules cannot restore
    ("living", "live"), ("lived", "live"), ("loving", "love"), ("loved", "love"),
    ("liking", "like"), ("liked", "like"), ("using", "use"), ("used", "use"),
    ("deciding", "decide"), ("decided", "decide"), ("excited", "excite"), ("exciting", "excite"),
    ("creating", "create"), ("created", "create"), ("improving", "improve"),
    ("improved", "improve"), ("believing", "believe"), ("believed", "believe"),
    ("receiving", "receive"), ("received", "receive"), ("achieving", "achieve"),
    ("achieved", "achieve"), ("managing", "manage"), ("managed", "manage"),
    ("changing", "change"), ("changed", "change"), ("challenging", "challenge"),
    ("challenged", "challenge"), ("continuing", "continue"), ("continued", "continue"),
    ("solving", "solve"), ("solved", "solve"), ("involving", "involve"), ("involved", "involve"),
    ("serving", "serve"), ("served", "serve"), ("moving", "move"), ("moved", "move"),
    ("sharing", "share"), ("shared", "share"), ("preparing", "prepare"), ("prepared", "prepare"),
    ("completing", "complete"), ("completed", "complete"), ("describing", "describe"),
    ("described", "describe"), ("imagining", "imagine"), ("imagined", "imagine"),
    ("producing", "produce"), ("produced", "produce"), ("providing", "provide"),
    ("provided", "provide"), ("requiring", "require"), ("required", "require"),
    ("organizing", "organize"), ("organized", "organize"), ("realizing", "realize"),
    ("realized", "realize"), ("valuing", "value"), ("valued", "value"), ("arguing", "argue"),
    ("argued", "argue"), ("agreeing", "agree"), ("agreed", "agree"), ("caring", "care"),
    ("cared", "care"), ("closing", "close"), ("closed", "close"), ("hoping", "hope"),
    ("hoped", "hope"), ("saving", "save"), ("saved", "save"), ("smiling", "smile"),
    ("smiled", "smile"), ("dancing", "dance"), ("danced", "dance"), ("exploring", "explore"),
    ("explored", "explore"), ("practicing", "practice"), ("practiced", "practice"),
    ("applying", "apply"),
    // irregular plurals
    ("children", "child"), ("men", "man"), ("women", "woman"), ("feet", "foot"),
    ("teeth", "tooth"), ("mice", "mouse"), ("lives", "life"), ("wives", "wife"),
    ("knives", "knife"), ("leaves", "leaf"), ("selves", "self"), ("ourselves", "ourselves"),
    ("themselves", "themselves"), ("yourselves", "yourselves"), ("data", "data"),
    ("criteria", "criterion"), ("movies", "movie"), ("cookies", "cookie"), ("lies", "lie"),
    ("ties", "tie"), ("dies", "die"), ("pies", "pie"),
    // protected words
    ("news", "news"), ("always", "always"), ("sometimes", "sometimes"), ("perhaps", "perhaps"),
    ("series", "series"), ("species", "species"), ("nothing", "nothing"),
    ("something", "something"), ("anything", "anything"), ("everything", "everything"),
    ("morning", "morning"), ("evening", "evening"), ("during", "during"),
    ("wedding", "wedding"), ("ceiling", "ceiling"), ("bus", "bus"), ("gas", "gas"),
    ("yes", "yes"), ("this", "this"), ("his", "his"), ("its", "its"), ("us", "us"),
    ("plus", "plus"), ("less", "less"), ("unless", "unless"), ("analysis", "analysis"),
    ("basis", "basis"), ("crisis", "crisis"), ("bias", "bias"), ("lens", "lens"),
    ("whereas", "whereas"), ("physics", "physics"), ("mathematics", "mathematics"),
    ("economics", "economics"), ("politics", "politics"), ("ethics", "ethics"),
    ("speed", "speed"), ("exceed", "exceed"), ("proceed", "proceed"), ("succeed", "succeed"),
    ("indeed", "indeed"), ("red", "red"), ("bed", "bed"), ("need", "need"), ("seed", "seed"),
    ("feed", "feed"), ("greed", "greed"), ("hundred", "hundred"), ("sacred", "sacred"),
    ("wicked", "wicked"), ("naked", "naked"), ("thanks", "thanks"), ("ones", "one"),
];

fn exception(word: &str) -> Option<&'static str> {
    EXCEPTIONS.iter().find(|(w, _)| *w == word).map(|(_, l)| *l)
}

fn is_vowel_at(bytes: &[u8], i: usize) -> bool {
    match bytes[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => true,
        b'y' => i > 0 && !is_vowel_at(bytes, i - 1),
        _ => false,
    }
}

fn has_vowel(s: &str) -> bool {
    let b = s.as_bytes();
    (0..b.len()).any(|i| is_vowel_at(b, i))
}

/// Number of vowel-consonant sequences: `[C](VC){m}[V]`.
fn measure(s: &str) -> usize {
    let b = s.as_bytes();
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..b.len() {
        let v = is_vowel_at(b, i);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

/// Ends consonant-vowel-consonant, the last not w, x or y.
fn ends_cvc(s: &str) -> bool {
    let b = s.as_bytes();
    let n = b.len();
    n >= 3
        && !is_vowel_at(b, n - 3)
        && is_vowel_at(b, n - 2)
        && !is_vowel_at(b, n - 1)
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
}

fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel_at(b, n - 1) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if measure(stem) == 1 && ends_cvc(stem) {
        let mut s = stem.to_string();
        s.push('e');
        return s;
    }
    stem.to_string()
}

fn step(word: &str) -> Option<String> {
    if let Some(lemma) = exception(word) {
        return (lemma != word).then(|| lemma.to_string());
    }
    if word.len() < 4 || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return None;
    }
    let strip = |suffix: &str, repl: &str| {
        let mut s = word[..word.len() - suffix.len()].to_string();
        s.push_str(repl);
        Some(s)
    };
    if word.ends_with("sses") {
        return strip("es", "");
    }
    if word.len() > 4 && (word.ends_with("ies") || word.ends_with("ied")) {
        return strip("ied", "y");
    }
    if word.ends_with("xes") || word.ends_with("ches") || word.ends_with("shes") || word.ends_with("zzes") {
        return strip("es", "");
    }
    if word.ends_with("eed") {
        let stem = &word[..word.len() - 3];
        return (measure(stem) > 0).then(|| {
            let mut s = stem.to_string();
            s.push_str("ee");
            s
        });
    }
    if word.ends_with("ed") {
        let stem = &word[..word.len() - 2];
        return (stem.len() >= 3 && has_vowel(stem)).then(|| restore_stem(stem));
    }
    if word.ends_with("ing") {
        let stem = &word[..word.len() - 3];
        return (stem.len() >= 3 && has_vowel(stem)).then(|| restore_stem(stem));
    }
    if word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
        return strip("s", "");
    }
    None
}

/// Lemma of a lowercased token. Deterministic and idempotent.
pub fn lemmatize(token: &str) -> String {
    let mut cur = token.to_string();
    // Every rule shortens the word or maps it to a fixed point, so this terminates quickly.
    for _ in 0..8 {
        match step(&cur) {
            Some(next) if next != cur => cur = next,
            _ => break,
        }
    }
    cur
}

/// Lemmatization strategy; the matcher's interner applies the same one to input tokens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemmatizer {
    /// The shipped exception table plus suffix rules.
    #[default]
    Rules,
    /// Tokens are their own lemmas.
    Identity,
}

impl Lemmatizer {
    pub fn lemma(&self, token: &str) -> String {
        match self {
            Lemmatizer::Rules => lemmatize(token),
            Lemmatizer::Identity => token.to_string(),
        }
    }

    pub fn code(&self) -> u32 {
        match self {
            Lemmatizer::Rules => 0,
            Lemmatizer::Identity => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Lemmatizer::Rules),
            1 => Some(Lemmatizer::Identity),
            _ => None,
        }
    }
}
