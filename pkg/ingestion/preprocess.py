import re

_NON_ASCII = re.compile(r"[^\x00-\x7f]")
_NON_ALNUM = re.compile(r"[^A-Za-z0-9]")


def preprocess_text(raw):
    """Tokenize one document: drop non-ASCII (emoji included), blank out every
    non-alphanumeric character, lowercase and split on whitespace."""
    text = _NON_ASCII.sub("", raw)
    text = _NON_ALNUM.sub(" ", text)
    return text.lower().split()
