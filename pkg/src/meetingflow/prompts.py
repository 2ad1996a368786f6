"""Prompt template loading and rendering.

Templates are plain text files, one per purpose tag, split into a [system]
and a [user] section. ``{{name}}`` placeholders are substituted at render
time; rendering fails loudly if a placeholder is left unresolved, since a
half-filled prompt would silently produce garbage completions (and garbage
fixture keys).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigInvalid
from .gateway import PURPOSE_TAGS

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class PromptTemplate:
    purpose_tag: str
    system_text: str
    user_text: str

    def render(self, **values) -> tuple[str, str]:
        """Substitute placeholders, returning (system_prompt, user_prompt)."""

        def fill(text: str) -> str:
            def sub(match):
                name = match.group(1)
                if name not in values:
                    raise ConfigInvalid(
                        f"template {self.purpose_tag}: no value for placeholder {{{{{name}}}}}"
                    )
                return str(values[match.group(1)])

            return _PLACEHOLDER.sub(sub, text)

        return fill(self.system_text), fill(self.user_text)


def _parse_template(tag: str, text: str) -> PromptTemplate:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.splitlines():
        marker = line.strip()
        if marker in ("[system]", "[user]"):
            current = sections.setdefault(marker[1:-1], [])
            continue
        if current is not None:
            current.append(line)
    if "system" not in sections or "user" not in sections:
        raise ConfigInvalid(f"template {tag} must contain [system] and [user] sections")
    return PromptTemplate(
        purpose_tag=tag,
        system_text="\n".join(sections["system"]).strip("\n"),
        user_text="\n".join(sections["user"]).strip("\n"),
    )


class PromptLibrary:
    """All five templates, loaded once from a directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise ConfigInvalid(f"prompt directory {self.directory} does not exist")
        self._templates: dict[str, PromptTemplate] = {}
        for tag in PURPOSE_TAGS:
            path = self.directory / f"{tag}.txt"
            if not path.is_file():
                raise ConfigInvalid(f"missing prompt template {path}")
            self._templates[tag] = _parse_template(tag, path.read_text(encoding="utf-8"))

    def get(self, tag: str) -> PromptTemplate:
        return self._templates[tag]

    def render(self, tag: str, **values) -> tuple[str, str]:
        return self.get(tag).render(**values)
