//! The 35 trait dimensions: five domains and six facets under each.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraitInfo {
    pub id: &'static str,
    pub name: &'static str,
    /// Domain id for facets; `None` for the domains themselves.
    pub domain: Option<&'static str>,
}

const fn domain(id: &'static str, name: &'static str) -> TraitInfo {
    TraitInfo { id, name, domain: None }
}

const fn facet(id: &'static str, name: &'static str, domain: &'static str) -> TraitInfo {
    TraitInfo { id, name, domain: Some(domain) }
}

pub const TRAITS: [TraitInfo; 35] = [
    domain("openness", "Openness"),
    domain("conscientiousness", "Conscientiousness"),
    domain("extraversion", "Extraversion"),
    domain("agreeableness", "Agreeableness"),
    domain("neuroticism", "Neuroticism"),
    facet("fantasy", "Fantasy", "openness"),
    facet("aesthetics", "Aesthetics", "openness"),
    facet("feelings", "Feelings", "openness"),
    facet("actions", "Actions", "openness"),
    facet("ideas", "Ideas", "openness"),
    facet("values", "Values", "openness"),
    facet("competence", "Competence", "conscientiousness"),
    facet("order", "Order", "conscientiousness"),
    facet("dutifulness", "Dutifulness", "conscientiousness"),
    facet("achievement_striving", "Achievement Striving", "conscientiousness"),
    facet("self_discipline", "Self-Discipline", "conscientiousness"),
    facet("deliberation", "Deliberation", "conscientiousness"),
    facet("warmth", "Warmth", "extraversion"),
    facet("gregariousness", "Gregariousness", "extraversion"),
    facet("assertiveness", "Assertiveness", "extraversion"),
    facet("activity", "Activity", "extraversion"),
    facet("excitement_seeking", "Excitement Seeking", "extraversion"),
    facet("positive_emotions", "Positive Emotions", "extraversion"),
    facet("trust", "Trust", "agreeableness"),
    facet("straightforwardness", "Straightforwardness", "agreeableness"),
    facet("altruism", "Altruism", "agreeableness"),
    facet("compliance", "Compliance", "agreeableness"),
    facet("modesty", "Modesty", "agreeableness"),
    facet("tender_mindedness", "Tender-Mindedness", "agreeableness"),
    facet("anxiety", "Anxiety", "neuroticism"),
    facet("angry_hostility", "Angry Hostility", "neuroticism"),
    facet("depression", "Depression", "neuroticism"),
    facet("self_consciousness", "Self-Consciousness", "neuroticism"),
    facet("impulsiveness", "Impulsiveness", "neuroticism"),
    facet("vulnerability", "Vulnerability", "neuroticism"),
];

pub fn trait_index(id: &str) -> Option<usize> {
    TRAITS.iter().position(|t| t.id == id)
}
