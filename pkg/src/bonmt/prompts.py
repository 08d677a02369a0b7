"""Chat-message prompt construction for translation requests."""

from __future__ import annotations

from .corpus import Segment
from .errors import ConfigError

# Display names for the language codes used in the prompt template. Extendable
# via the `extra_names` argument / CLI config; codes are never sent raw.
LANG_NAMES = {
    "en": "English",
    "ja": "Japanese",
    "zh": "Chinese",
    "de": "German",
    "ru": "Russian",
    "es": "Spanish",
    "is": "Icelandic",
    "fr": "French",
    "cs": "Czech",
    "uk": "Ukrainian",
    "hi": "Hindi",
}

_TEMPLATE = (
    "You are a helpful translation assistant. Now translate the following "
    "{src_lang} text (in {domain} domain) into natural, fluent {tgt_lang} "
    "sentence while preserving the original meaning, tone, and register. "
    "Please retain the lines and paragraph breaks in the translation, and do "
    "not produce explanations or commentary in your answer."
)


def language_name(code: str, extra_names: dict[str, str] | None = None) -> str:
    if extra_names and code in extra_names:
        return extra_names[code]
    try:
        return LANG_NAMES[code]
    except KeyError:
        raise ConfigError(f"no display name configured for language code {code!r}") from None


def build_prompt(
    seg: Segment,
    extra_names: dict[str, str] | None = None,
    literal_template: bool = False,
) -> list[dict[str, str]]:
    """Build the chat messages for one segment.

    The source text goes into a final user turn. The upstream template puts it
    in an 'assistant' turn, which primes completion instead of instructing;
    ``literal_template=True`` reproduces that literal layout.
    """
    instruction = _TEMPLATE.format(
        src_lang=language_name(seg.pair.src, extra_names),
        tgt_lang=language_name(seg.pair.tgt, extra_names),
        domain=seg.domain,
    )
    src_role = "assistant" if literal_template else "user"
    return [
        {"role": "user", "content": instruction},
        {"role": src_role, "content": seg.src},
    ]


def prompt_text(messages: list[dict[str, str]]) -> str:
    """Flattened prompt content, used for approximate token counting."""
    return "\n".join(m["content"] for m in messages)
