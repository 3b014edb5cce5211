"""
Reading and writing model files.

Model files are YAML documents. Parsing keeps the composed node tree so that
every diagnostic, whether raised by the schema or by the validator, can be
reported with the line and column of the declaration it concerns.
"""

import logging
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import yaml
from pydantic import ValidationError

from src.core.errors import Diagnostic, Loc, ModelFileError
from src.core.schema import ModelFile

logger = logging.getLogger(__name__)


class SourceMap:
    """Maps document paths to positions in the source text (1-based)."""

    def __init__(self, root: Optional[yaml.Node] = None):
        self.root = root

    def position(self, loc: Loc) -> Tuple[Optional[int], Optional[int]]:
        node = self.root
        if node is None:
            return None, None
        mark = node.start_mark
        for part in loc:
            if isinstance(node, yaml.MappingNode):
                match = next(((k, v) for k, v in node.value if k.value == str(part)), None)
                if match is None:
                    break
                key, node = match
                mark = key.start_mark
            elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and 0 <= part < len(node.value):
                node = node.value[part]
                mark = node.start_mark
            else:
                break
        return mark.line + 1, mark.column + 1

    def locate(self, diagnostic: Diagnostic) -> Diagnostic:
        if diagnostic.line is not None:
            return diagnostic
        return diagnostic.at(*self.position(diagnostic.loc))

    def locate_all(self, diagnostics: List[Diagnostic]) -> List[Diagnostic]:
        return [self.locate(d) for d in diagnostics]


def _duplicate_keys(node: yaml.Node, loc: Loc = ()) -> Iterator[Diagnostic]:
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for key, value in node.value:
            name = key.value
            if isinstance(key, yaml.ScalarNode) and name in seen:
                yield Diagnostic(loc + (name,), f"duplicate declaration of '{name}'").at(
                    key.start_mark.line + 1, key.start_mark.column + 1
                )
            seen.add(name)
            yield from _duplicate_keys(value, loc + (name,))
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            yield from _duplicate_keys(item, loc + (i,))


def _schema_diagnostic(error: dict) -> Diagnostic:
    loc = tuple(error["loc"])
    kind = error["type"]
    if kind == "extra_forbidden":
        return Diagnostic(loc, f"unknown key '{loc[-1]}'")
    if kind == "missing":
        what = "section" if len(loc) == 1 else "field"
        return Diagnostic(loc, f"missing required {what}: {loc[-1]}")
    message = error["msg"]
    if message.startswith("Value error, "):
        message = message[len("Value error, ") :]
    return Diagnostic(loc, message)


def parse_text(text: str) -> Tuple[ModelFile, SourceMap]:
    """Parse model-file text; raises ModelFileError with positioned diagnostics."""
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        data = loader.construct_document(node) if node is not None else None
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line, column = (mark.line + 1, mark.column + 1) if mark else (None, None)
        raise ModelFileError([Diagnostic((), f"syntax error: {e.problem or e}", line, column)]) from e
    except yaml.YAMLError as e:
        raise ModelFileError([Diagnostic((), f"syntax error: {e}")]) from e
    finally:
        loader.dispose()

    source = SourceMap(node)
    duplicates = list(_duplicate_keys(node)) if node is not None else []
    if duplicates:
        raise ModelFileError(duplicates)

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ModelFileError([source.locate(Diagnostic((), "a model file must be a mapping of sections"))])

    try:
        doc = ModelFile.model_validate(data)
    except ValidationError as e:
        raise ModelFileError(source.locate_all([_schema_diagnostic(error) for error in e.errors()])) from e
    return doc, source


def parse_model_with_positions(path: Union[str, Path]) -> Tuple[ModelFile, SourceMap]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFileError([Diagnostic((), f"cannot read model file: {e.strerror or e}")]) from e
    doc, source = parse_text(text)
    logger.info(
        f"Parsed {path}: {len(doc.locations)} locations, {len(doc.edges)} edges, {len(doc.actors)} actors"
    )
    return doc, source


def parse_model(path: Union[str, Path]) -> ModelFile:
    """Parse a model file into its declaration document."""
    doc, _ = parse_model_with_positions(path)
    return doc


def dump_model(doc: ModelFile) -> str:
    """Canonical serialization of a model document."""
    return yaml.safe_dump(doc.normalized(), sort_keys=False, allow_unicode=True, default_flow_style=False)

