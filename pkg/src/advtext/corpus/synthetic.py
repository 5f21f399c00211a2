"""Bundled synthetic sentiment corpus.

Reviews are assembled from templated sentences over fixed word pools, with
the sentiment carried by polarity-specific adjective/verb choices (plus a
small crossover noise rate). Texts include ordinary punctuation and
contractions so the tokenizer rules are exercised end to end. Generation is
deterministic given the seed.
"""

from __future__ import annotations

import numpy as np

from advtext.corpus.tokenizer import tokenize

OPENERS = [
    "Honestly", "Frankly", "Overall", "Ultimately", "Granted", "Admittedly",
    "Look", "Somehow", "Surprisingly", "Truthfully", "Anyway", "Indeed",
]

NOUNS = [
    "movie", "film", "picture", "feature", "plot", "story", "storyline",
    "acting", "cast", "script", "screenplay", "director", "direction",
    "scenes", "dialogue", "soundtrack", "score", "pacing", "characters",
    "ending", "finale", "cinematography", "humor", "effects", "visuals",
    "editing", "premise", "themes", "tone", "atmosphere", "performances",
    "writing", "sequel", "romance", "action", "drama", "comedy", "thriller",
    "mystery", "villain", "hero", "heroine", "lead", "chemistry", "twists",
    "narrative", "message", "climax", "opening", "montage", "costumes",
    "sets", "casting", "lighting", "sound", "staging", "framing", "adaptation",
    "prologue", "epilogue", "subplot", "backstory", "voiceover", "flashbacks",
    "stunts", "choreography", "makeup", "scenery", "locations", "ensemble",
    "protagonist", "antagonist", "cameo", "runtime", "trailer", "poster",
    "remake", "reboot", "franchise", "satire", "parody", "western", "musical",
    "biopic", "documentary", "animation", "fantasy", "noir",
]

POS_ADJ = [
    "wonderful", "brilliant", "superb", "delightful", "fantastic", "marvelous",
    "excellent", "stunning", "gorgeous", "charming", "gripping", "riveting",
    "compelling", "touching", "moving", "hilarious", "clever", "witty",
    "sharp", "elegant", "masterful", "flawless", "memorable", "refreshing",
    "inventive", "imaginative", "heartfelt", "satisfying", "thrilling",
    "captivating", "engaging", "vibrant", "polished", "powerful", "graceful",
    "splendid", "remarkable", "impressive", "outstanding", "magnificent",
    "enchanting", "radiant", "inspired", "tender", "joyous", "breathtaking",
    "sublime", "luminous", "assured", "exhilarating", "immersive", "nuanced",
    "textured", "soulful", "buoyant", "dazzling", "seamless", "evocative",
    "rousing", "intoxicating", "magnetic", "spirited",
]

NEG_ADJ = [
    "terrible", "awful", "dreadful", "boring", "tedious", "dull", "lifeless",
    "clumsy", "sloppy", "lazy", "shallow", "hollow", "messy", "bland",
    "stale", "predictable", "incoherent", "pointless", "painful", "grating",
    "annoying", "irritating", "forgettable", "amateurish", "wooden", "flat",
    "contrived", "ridiculous", "absurd", "laughable", "embarrassing",
    "disappointing", "frustrating", "confusing", "muddled", "tiresome",
    "insufferable", "dismal", "dire", "atrocious", "abysmal", "horrendous",
    "ghastly", "vapid", "soulless", "charmless", "witless", "joyless",
    "leaden", "turgid", "plodding", "lumbering", "disjointed", "overwrought",
    "undercooked", "threadbare", "airless", "inert", "garish", "lurid",
    "clunky", "cloying",
]

POS_VERB = ["loved", "adored", "enjoyed", "admired", "savored", "treasured", "applauded", "relished"]
NEG_VERB = ["hated", "despised", "loathed", "regretted", "resented", "endured", "dreaded", "detested"]

ADVERBS = [
    "absolutely", "utterly", "truly", "genuinely", "thoroughly", "completely",
    "remarkably", "consistently", "relentlessly", "oddly", "strangely",
    "quietly", "wildly", "undeniably", "plainly", "unmistakably",
    "positively", "decidedly", "profoundly", "supremely",
]

SETTINGS = [
    "in the first act", "by the second act", "in the third act",
    "during the opening reel", "before the final reel", "after the intermission",
    "from the very first frame", "until the closing credits",
    "throughout the middle stretch", "near the halfway mark",
]

NAMES = [
    "Hart", "Monroe", "Calloway", "Winters", "Ashford", "Bellamy", "Crane",
    "Delacroix", "Ellington", "Fairbanks", "Greer", "Hollis", "Ingram",
    "Jasper", "Kensington", "Larkin", "Mercer", "Navarro", "Osborne",
    "Prescott", "Quimby", "Ramsey", "Sinclair", "Thatcher", "Underwood",
    "Vance", "Whitfield", "Yardley", "Zimmerman", "Abernathy", "Blackwood",
    "Cortez", "Dunmore", "Everhart", "Falk", "Galloway", "Hawthorne",
    "Irving", "Jennings", "Kessler", "Lockhart", "Marlowe", "Norwood",
    "Oakes", "Pemberton", "Radcliffe", "Sterling", "Townsend", "Vaughn",
    "Wexford", "Aldridge", "Barlow", "Carmichael", "Davenport", "Ellsworth",
    "Forsythe", "Granger", "Huxley", "Ives", "Jarvis", "Kendrick", "Lowell",
    "Middleton", "Nash", "Ogilvy", "Palmer", "Quinn", "Rutherford",
    "Sheffield", "Tennant", "Ulrich", "Vickers", "Wainwright", "Yates",
    "Ziegler", "Atwater", "Bryce", "Colfax", "Drummond", "Ensley",
]

STUDIOS = [
    "Meridian", "Pinnacle", "Harborlight", "Silverbrook", "Copperfield",
    "Northgate", "Eastbrook", "Briarcliff", "Stonebridge", "Clearwater",
    "Ironwood", "Lanternhill", "Foxglove", "Greyhaven", "Summerfield",
    "Windmere", "Oakhurst", "Maplewood", "Riverbend", "Thornfield",
    "Ashgrove", "Birchwood", "Cedarcrest", "Dovetail", "Elmhurst",
    "Fernwood", "Gildercrest", "Hallowell", "Ivybridge", "Juniper",
]

TAILS_POS = [
    "It's a must-see.",
    "You'll want to watch it twice.",
    "I'd recommend it to anyone.",
    "Don't miss it.",
    "It doesn't get better than this.",
    "We'll be talking about it for years.",
]

TAILS_NEG = [
    "It's a mess.",
    "You'll want your evening back.",
    "I wouldn't recommend it to anyone.",
    "Don't bother.",
    "It doesn't get worse than this.",
    "We'll be apologizing for it for years.",
]

_CROSSOVER = 0.05  # chance a sentiment slot draws from the opposite pool


class _ReviewBuilder:
    def __init__(self, rng: np.random.Generator, label: int):
        self.rng = rng
        self.label = label

    def pick(self, pool):
        return pool[int(self.rng.integers(len(pool)))]

    def adj(self):
        own, other = (POS_ADJ, NEG_ADJ) if self.label == 1 else (NEG_ADJ, POS_ADJ)
        return self.pick(other if self.rng.random() < _CROSSOVER else own)

    def verb(self):
        own, other = (POS_VERB, NEG_VERB) if self.label == 1 else (NEG_VERB, POS_VERB)
        return self.pick(other if self.rng.random() < _CROSSOVER else own)

    def sentence(self) -> str:
        kind = int(self.rng.integers(10))
        if kind == 0:
            return f"The {self.pick(NOUNS)} was {self.pick(ADVERBS)} {self.adj()}."
        if kind == 1:
            return f"I {self.verb()} the {self.pick(NOUNS)} and the {self.pick(NOUNS)}."
        if kind == 2:
            return (
                f"{self.pick(OPENERS)}, the {self.pick(NOUNS)} was {self.adj()} "
                f"and the {self.pick(NOUNS)} felt {self.adj()}."
            )
        if kind == 3:
            return f"It's a {self.adj()} {self.pick(NOUNS)} with {self.adj()} {self.pick(NOUNS)}."
        if kind == 4:
            return (
                f"{self.pick(NAMES)}'s {self.pick(NOUNS)} was {self.adj()}, "
                f"and {self.pick(NAMES)} made the {self.pick(NOUNS)} seem {self.adj()}."
            )
        if kind == 5:
            return (
                f"Every {self.pick(NOUNS)} felt {self.adj()}, from the {self.pick(NOUNS)} "
                f"to the {self.pick(NOUNS)}."
            )
        if kind == 6:
            return (
                f"The {self.pick(NOUNS)} turned {self.adj()} {self.pick(SETTINGS)}, "
                f"which left the {self.pick(NOUNS)} looking {self.adj()}."
            )
        if kind == 7:
            return (
                f"{self.pick(NAMES)} and {self.pick(NAMES)} gave the {self.pick(NOUNS)} "
                f"a {self.pick(ADVERBS)} {self.adj()} quality."
            )
        if kind == 8:
            return (
                f"{self.pick(STUDIOS)} Pictures delivered a {self.adj()} "
                f"{self.pick(NOUNS)} wrapped around a {self.adj()} {self.pick(NOUNS)}."
            )
        return f"I {self.verb()} how {self.adj()} the {self.pick(NOUNS)} was."

    def tail(self) -> str:
        return self.pick(TAILS_POS if self.label == 1 else TAILS_NEG)

    def build(self) -> str:
        target = int(self.rng.integers(12, 55))
        parts = [self.sentence()]
        count = len(tokenize(parts[0]))
        while count < target:
            nxt = self.sentence() if self.rng.random() < 0.8 else self.tail()
            n = len(tokenize(nxt))
            if count + n > 60:
                break
            parts.append(nxt)
            count += n
        return " ".join(parts)


def generate_reviews(rng: np.random.Generator, n: int) -> list[tuple[int, str]]:
    """n labeled reviews, alternating polarity, distinct texts."""
    seen = set()
    out = []
    while len(out) < n:
        label = len(out) % 2
        text = _ReviewBuilder(rng, label).build()
        if text in seen:
            continue
        seen.add(text)
        out.append((label, text))
    return out


def synthetic_splits(seed: int = 2024, n_train: int = 2000, n_dev: int = 300, n_test: int = 500):
    """Train/dev/test splits of the bundled corpus, deterministic given seed."""
    rng = np.random.default_rng(seed)
    everything = generate_reviews(rng, n_train + n_dev + n_test)
    return {
        "train": everything[:n_train],
        "dev": everything[n_train : n_train + n_dev],
        "test": everything[n_train + n_dev :],
    }
