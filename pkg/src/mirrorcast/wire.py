"""Wire protocol for the two mirror channels.

Every exchange between the viewer client and the server travels over two
WebSocket connections:

  - the *view* channel carries rendered output (screenshots + view metadata),
  - the *command* channel carries everything else bidirectionally (session
    hello, captured input events, server notices).

Frame discipline (version 1):

  - Screenshot payloads are raw binary frames: an 8-byte big-endian sequence
    number followed by the PNG bytes. Nothing else ever rides a binary frame.
  - All other messages are UTF-8 JSON text frames with the envelope
    ``{"v": 1, "channel": ..., "kind": ..., "seq": ..., "body": {...}}``
    serialized with sorted keys so encoding is deterministic.

Sequence numbers start at 1 and increase strictly by 1 per (session,
direction, channel). A receiver that observes anything else must treat the
session as broken and close it.

This module is a pure codec: no I/O, no shared mutable state, safe to use
from any thread.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Any

PROTOCOL_VERSION = 1

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_SEQ = struct.Struct(">Q")

# Size of the binary-frame header (the big-endian sequence number).
BINARY_HEADER_SIZE = _SEQ.size


class WireError(Exception):
    """Base class for protocol errors."""


class InvalidMessage(WireError):
    """The message violates a structural invariant and cannot be encoded."""


class MalformedFrame(WireError):
    """The frame is not valid syntax for its frame type."""


class UnknownKind(WireError):
    """The frame is well-formed but carries an unrecognized kind tag.

    Receivers must skip the message, not tear the session down.
    """


class SequenceRegression(WireError):
    """A sequence number regressed or skipped; the session must terminate."""


class Channel(str, Enum):
    VIEW = "view"
    COMMAND = "cmd"


class FrameType(str, Enum):
    TEXT = "text"
    BINARY = "binary"


class MessageKind(str, Enum):
    # command channel, client -> server
    HELLO = "hello"
    INPUT = "input"
    # command channel, server -> client
    READY = "ready"
    ERROR = "error"
    # view channel, server -> client
    SCREENSHOT = "screenshot"
    VIEW = "view"


class InputKind(str, Enum):
    CLICK = "click"
    KEY_PRESS = "keyPress"
    TEXT_CHANGED = "textChanged"
    PASTE = "paste"
    SCROLL = "scroll"
    NAVIGATE = "navigate"
    HISTORY_BACK = "historyBack"
    HISTORY_FORWARD = "historyForward"
    DRAG_MOVE = "dragMove"


class DragPhase(str, Enum):
    START = "start"
    MOVE = "move"
    END = "end"


class ElementKind(str, Enum):
    TEXT_BOX = "textBox"
    BUTTON = "button"
    HYPERLINK = "hyperlink"


@dataclass(frozen=True)
class InputEvent:
    """One captured viewer action.

    Coordinates are full-page CSS pixels (the client adds its local scroll
    offset before sending). ``text`` always carries the complete new field
    value, never a delta, so a lost frame cannot desynchronize a text box.
    """

    kind: InputKind
    x: int | None = None
    y: int | None = None
    key: str | None = None
    element_id: str | None = None
    text: str | None = None
    url: str | None = None
    phase: DragPhase | None = None
    timestamp_ms: int = 0

    def validate(self) -> None:
        k = self.kind
        if k in (InputKind.CLICK, InputKind.SCROLL, InputKind.DRAG_MOVE):
            if self.x is None or self.y is None:
                raise InvalidMessage(f"{k.value} requires x and y")
            if self.x < 0 or self.y < 0:
                raise InvalidMessage("coordinates must be non-negative")
        if k == InputKind.DRAG_MOVE and self.phase is None:
            raise InvalidMessage("dragMove requires a phase")
        if k == InputKind.KEY_PRESS and not self.key:
            raise InvalidMessage("keyPress requires a key")
        if k in (InputKind.TEXT_CHANGED, InputKind.PASTE):
            if not self.element_id:
                raise InvalidMessage(f"{k.value} requires elementId")
            if self.text is None:
                raise InvalidMessage(f"{k.value} requires the full text value")
        if k == InputKind.NAVIGATE:
            if not self.url or not self.url.startswith("/"):
                raise InvalidMessage("navigate requires a proxy-local url")
        if self.timestamp_ms < 0:
            raise InvalidMessage("timestampMs must be non-negative")

    def to_body(self) -> dict[str, Any]:
        body: dict[str, Any] = {"kind": self.kind.value, "timestampMs": self.timestamp_ms}
        if self.x is not None:
            body["x"] = self.x
        if self.y is not None:
            body["y"] = self.y
        if self.key is not None:
            body["key"] = self.key
        if self.element_id is not None:
            body["elementId"] = self.element_id
        if self.text is not None:
            body["text"] = self.text
        if self.url is not None:
            body["url"] = self.url
        if self.phase is not None:
            body["phase"] = self.phase.value
        return body

    @classmethod
    def from_body(cls, body: dict[str, Any]) -> "InputEvent":
        try:
            kind = InputKind(body["kind"])
        except (KeyError, ValueError) as exc:
            raise MalformedFrame(f"bad input kind: {body.get('kind')!r}") from exc
        phase = body.get("phase")
        return cls(
            kind=kind,
            x=body.get("x"),
            y=body.get("y"),
            key=body.get("key"),
            element_id=body.get("elementId"),
            text=body.get("text"),
            url=body.get("url"),
            phase=DragPhase(phase) if phase is not None else None,
            timestamp_ms=body.get("timestampMs", 0),
        )


@dataclass(frozen=True)
class UIElementDescriptor:
    """Geometry plus content of one interactive element on the page.

    ``x``/``y`` are full-page CSS pixels. ``href`` is already rewritten to a
    proxy-local path (or None for script-handled clickables, which the client
    forwards as plain coordinate clicks).
    """

    element_id: str
    kind: ElementKind
    x: int
    y: int
    width: int
    height: int
    text: str = ""
    href: str | None = None
    focused: bool = False
    # original input type for text boxes ("text", "password", ...) so the
    # client can render a faithful native widget
    input_type: str | None = None

    def validate(self) -> None:
        # href is deliberately not constrained to proxy-local form here: the
        # composer owns the zero-drop-out guarantee and the auditor must be
        # able to observe a violating href if one ever slips through.
        if self.width <= 0 or self.height <= 0:
            raise InvalidMessage(f"element {self.element_id}: degenerate box")
        if self.x < 0 or self.y < 0:
            raise InvalidMessage(f"element {self.element_id}: negative position")

    def to_body(self) -> dict[str, Any]:
        body: dict[str, Any] = {
            "elementId": self.element_id,
            "kind": self.kind.value,
            "x": self.x,
            "y": self.y,
            "width": self.width,
            "height": self.height,
            "text": self.text,
            "focused": self.focused,
        }
        if self.href is not None:
            body["href"] = self.href
        if self.input_type is not None:
            body["inputType"] = self.input_type
        return body

    @classmethod
    def from_body(cls, body: dict[str, Any]) -> "UIElementDescriptor":
        try:
            return cls(
                element_id=body["elementId"],
                kind=ElementKind(body["kind"]),
                x=body["x"],
                y=body["y"],
                width=body["width"],
                height=body["height"],
                text=body.get("text", ""),
                href=body.get("href"),
                focused=body.get("focused", False),
                input_type=body.get("inputType"),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedFrame(f"bad element descriptor: {exc}") from exc


@dataclass(frozen=True)
class ViewMeta:
    """Metadata half of one render cycle, sent as a text frame.

    The screenshot bytes travel separately as a binary frame; ``image_seq``
    names that frame's sequence number. ``image_seq`` of None means the image
    is unchanged and the client must reuse the previous frame.
    """

    sequence: int
    image_width: int
    image_height: int
    elements: tuple[UIElementDescriptor, ...]
    page_title: str
    favicon_path: str
    display_path: str
    history_back: int
    history_forward: int
    image_seq: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))

    def validate(self) -> None:
        if not self.display_path.startswith("/"):
            raise InvalidMessage("displayPath must start with '/'")
        if self.image_width <= 0 or self.image_height <= 0:
            raise InvalidMessage("image dimensions must be positive")
        if self.history_back < 0 or self.history_forward < 0:
            raise InvalidMessage("history depths must be non-negative")
        for el in self.elements:
            el.validate()
            if el.x + el.width > self.image_width or el.y + el.height > self.image_height:
                raise InvalidMessage(
                    f"element {el.element_id} extends outside the screenshot"
                )

    def to_body(self) -> dict[str, Any]:
        return {
            "sequence": self.sequence,
            "imageWidth": self.image_width,
            "imageHeight": self.image_height,
            "imageSeq": self.image_seq,
            "elements": [el.to_body() for el in self.elements],
            "pageTitle": self.page_title,
            "faviconPath": self.favicon_path,
            "displayPath": self.display_path,
            "historyDepth": [self.history_back, self.history_forward],
        }

    @classmethod
    def from_body(cls, body: dict[str, Any]) -> "ViewMeta":
        try:
            back, forward = body["historyDepth"]
            return cls(
                sequence=body["sequence"],
                image_width=body["imageWidth"],
                image_height=body["imageHeight"],
                image_seq=body.get("imageSeq"),
                elements=tuple(
                    UIElementDescriptor.from_body(e) for e in body["elements"]
                ),
                page_title=body["pageTitle"],
                favicon_path=body["faviconPath"],
                display_path=body["displayPath"],
                history_back=back,
                history_forward=forward,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedFrame(f"bad view body: {exc}") from exc


@dataclass(frozen=True)
class Screenshot:
    """Raw image payload for a binary frame."""

    image: bytes

    def validate(self) -> None:
        if not self.image:
            raise InvalidMessage("empty screenshot payload")
        if not self.image.startswith(PNG_SIGNATURE):
            raise InvalidMessage("screenshot payload is not PNG")


@dataclass(frozen=True)
class Hello:
    """Client's opening message on the command channel."""

    viewport_width: int
    viewport_height: int
    initial_path: str = "/"

    def validate(self) -> None:
        if self.viewport_width <= 0 or self.viewport_height <= 0:
            raise InvalidMessage("viewport dimensions must be positive")
        if not self.initial_path.startswith("/"):
            raise InvalidMessage("initialPath must start with '/'")

    def to_body(self) -> dict[str, Any]:
        return {
            "viewportWidth": self.viewport_width,
            "viewportHeight": self.viewport_height,
            "initialPath": self.initial_path,
        }

    @classmethod
    def from_body(cls, body: dict[str, Any]) -> "Hello":
        try:
            return cls(
                viewport_width=body["viewportWidth"],
                viewport_height=body["viewportHeight"],
                initial_path=body.get("initialPath", "/"),
            )
        except (KeyError, TypeError) as exc:
            raise MalformedFrame(f"bad hello body: {exc}") from exc


@dataclass(frozen=True)
class Ready:
    """Server acknowledgement that the session is live."""

    session_id: str

    def validate(self) -> None:
        if not self.session_id:
            raise InvalidMessage("sessionId must be non-empty")

    def to_body(self) -> dict[str, Any]:
        return {"sessionId": self.session_id}

    @classmethod
    def from_body(cls, body: dict[str, Any]) -> "Ready":
        try:
            return cls(session_id=body["sessionId"])
        except KeyError as exc:
            raise MalformedFrame("bad ready body") from exc


@dataclass(frozen=True)
class ErrorNotice:
    """Server-side protocol or session error, sent before closing."""

    code: str
    message: str = ""

    def validate(self) -> None:
        if not self.code:
            raise InvalidMessage("error code must be non-empty")

    def to_body(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message}

    @classmethod
    def from_body(cls, body: dict[str, Any]) -> "ErrorNotice":
        try:
            return cls(code=body["code"], message=body.get("message", ""))
        except KeyError as exc:
            raise MalformedFrame("bad error body") from exc


_BODY_TYPES: dict[MessageKind, type] = {
    MessageKind.HELLO: Hello,
    MessageKind.INPUT: InputEvent,
    MessageKind.READY: Ready,
    MessageKind.ERROR: ErrorNotice,
    MessageKind.SCREENSHOT: Screenshot,
    MessageKind.VIEW: ViewMeta,
}

_KIND_CHANNEL: dict[MessageKind, Channel] = {
    MessageKind.HELLO: Channel.COMMAND,
    MessageKind.INPUT: Channel.COMMAND,
    MessageKind.READY: Channel.COMMAND,
    MessageKind.ERROR: Channel.COMMAND,
    MessageKind.SCREENSHOT: Channel.VIEW,
    MessageKind.VIEW: Channel.VIEW,
}


@dataclass(frozen=True)
class WireMessage:
    """Tagged envelope carried on one of the two channels."""

    channel: Channel
    kind: MessageKind
    sequence: int
    body: Any

    def validate(self) -> None:
        if self.sequence < 1:
            raise InvalidMessage("sequence numbers start at 1")
        expected_channel = _KIND_CHANNEL[self.kind]
        if self.channel is not expected_channel:
            raise InvalidMessage(
                f"{self.kind.value} belongs on the {expected_channel.value} channel"
            )
        body_type = _BODY_TYPES[self.kind]
        if not isinstance(self.body, body_type):
            raise InvalidMessage(
                f"{self.kind.value} body must be {body_type.__name__}"
            )
        self.body.validate()


def encode(message: WireMessage) -> tuple[bytes, FrameType]:
    """Encode a message to its frame bytes plus the frame type to send.

    Deterministic: equal messages always yield identical bytes. Raises
    InvalidMessage when a structural invariant is violated.
    """
    message.validate()
    if message.kind is MessageKind.SCREENSHOT:
        return _SEQ.pack(message.sequence) + message.body.image, FrameType.BINARY
    envelope = {
        "v": PROTOCOL_VERSION,
        "channel": message.channel.value,
        "kind": message.kind.value,
        "seq": message.sequence,
        "body": message.body.to_body(),
    }
    data = json.dumps(
        envelope, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")
    return data, FrameType.TEXT


def decode(frame: bytes, frame_type: FrameType) -> WireMessage:
    """Exact inverse of :func:`encode` on conforming input.

    Raises MalformedFrame for bad syntax and UnknownKind for a well-formed
    frame whose kind tag is not recognized (the caller should skip those, not
    kill the session).
    """
    if frame_type is FrameType.BINARY:
        if len(frame) < BINARY_HEADER_SIZE + 1:
            raise MalformedFrame("binary frame truncated")
        (sequence,) = _SEQ.unpack_from(frame)
        if sequence < 1:
            raise MalformedFrame("binary frame sequence must be >= 1")
        return WireMessage(
            channel=Channel.VIEW,
            kind=MessageKind.SCREENSHOT,
            sequence=sequence,
            body=Screenshot(image=frame[BINARY_HEADER_SIZE:]),
        )

    try:
        envelope = json.loads(frame.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrame(f"bad text frame: {exc}") from exc
    if not isinstance(envelope, dict):
        raise MalformedFrame("text frame is not an object")
    try:
        channel_tag = envelope["channel"]
        kind_tag = envelope["kind"]
        sequence = envelope["seq"]
        body_obj = envelope["body"]
    except KeyError as exc:
        raise MalformedFrame(f"envelope missing {exc}") from exc
    if envelope.get("v") != PROTOCOL_VERSION:
        raise MalformedFrame(f"unsupported protocol version {envelope.get('v')!r}")
    try:
        channel = Channel(channel_tag)
    except ValueError as exc:
        raise MalformedFrame(f"unknown channel {channel_tag!r}") from exc
    try:
        kind = MessageKind(kind_tag)
    except ValueError as exc:
        raise UnknownKind(f"unknown message kind {kind_tag!r}") from exc
    if kind is MessageKind.SCREENSHOT:
        raise MalformedFrame("screenshot bodies must ride binary frames")
    if not isinstance(sequence, int) or sequence < 1:
        raise MalformedFrame(f"bad sequence {sequence!r}")
    if not isinstance(body_obj, dict):
        raise MalformedFrame("body is not an object")
    body = _BODY_TYPES[kind].from_body(body_obj)
    message = WireMessage(channel=channel, kind=kind, sequence=sequence, body=body)
    try:
        message.validate()
    except InvalidMessage as exc:
        raise MalformedFrame(str(exc)) from exc
    return message


class SequenceTracker:
    """Enforces the 1,2,3,... ordering for one channel/direction."""

    def __init__(self) -> None:
        self.last = 0

    def observe(self, sequence: int) -> None:
        if sequence <= self.last:
            raise SequenceRegression(
                f"sequence {sequence} after {self.last} (regression)"
            )
        if sequence != self.last + 1:
            raise SequenceRegression(
                f"sequence {sequence} after {self.last} (gap)"
            )
        self.last = sequence


class SequenceAllocator:
    """Hands out the next sequence number for one channel/direction."""

    def __init__(self) -> None:
        self._next = 1

    def take(self) -> int:
        seq = self._next
        self._next += 1
        return seq


@dataclass(frozen=True)
class EnrichedView:
    """One render cycle's full output, as produced by the view composer.

    ``screenshot`` is None when the frame is pixel-identical to the previous
    one; the wire then carries only the metadata and the client reuses its
    last image.
    """

    sequence: int
    screenshot: bytes | None
    image_width: int
    image_height: int
    elements: tuple[UIElementDescriptor, ...]
    page_title: str
    favicon_path: str
    display_path: str
    history_back: int
    history_forward: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))


def view_messages(
    view: EnrichedView, allocate: SequenceAllocator
) -> list[WireMessage]:
    """Split an EnrichedView into its view-channel wire messages.

    A changed frame becomes [screenshot, view]; a deduplicated frame becomes
    just [view] with ``image_seq`` None.
    """
    messages: list[WireMessage] = []
    image_seq: int | None = None
    if view.screenshot is not None:
        image_seq = allocate.take()
        messages.append(
            WireMessage(
                channel=Channel.VIEW,
                kind=MessageKind.SCREENSHOT,
                sequence=image_seq,
                body=Screenshot(image=view.screenshot),
            )
        )
    meta = ViewMeta(
        sequence=view.sequence,
        image_width=view.image_width,
        image_height=view.image_height,
        image_seq=image_seq,
        elements=view.elements,
        page_title=view.page_title,
        favicon_path=view.favicon_path,
        display_path=view.display_path,
        history_back=view.history_back,
        history_forward=view.history_forward,
    )
    messages.append(
        WireMessage(
            channel=Channel.VIEW,
            kind=MessageKind.VIEW,
            sequence=allocate.take(),
            body=meta,
        )
    )
    return messages


class ViewAssembler:
    """Client-side pairing of screenshot frames with view metadata.

    Feed every decoded view-channel message in order; a completed
    EnrichedView is returned whenever a view metadata message arrives.
    """

    def __init__(self) -> None:
        self._tracker = SequenceTracker()
        self._pending_image: tuple[int, bytes] | None = None
        self._last_image: bytes | None = None

    def feed(self, message: WireMessage) -> EnrichedView | None:
        self._tracker.observe(message.sequence)
        if message.kind is MessageKind.SCREENSHOT:
            self._pending_image = (message.sequence, message.body.image)
            return None
        if message.kind is not MessageKind.VIEW:
            raise MalformedFrame(f"{message.kind.value} on the view channel")
        meta: ViewMeta = message.body
        screenshot: bytes | None
        if meta.image_seq is None:
            if self._last_image is None:
                raise MalformedFrame("view reuses an image before any was sent")
            screenshot = None
        else:
            if self._pending_image is None or self._pending_image[0] != meta.image_seq:
                raise MalformedFrame(
                    f"view references image seq {meta.image_seq} which is not pending"
                )
            screenshot = self._pending_image[1]
            self._last_image = screenshot
            self._pending_image = None
        return EnrichedView(
            sequence=meta.sequence,
            screenshot=screenshot,
            image_width=meta.image_width,
            image_height=meta.image_height,
            elements=meta.elements,
            page_title=meta.page_title,
            favicon_path=meta.favicon_path,
            display_path=meta.display_path,
            history_back=meta.history_back,
            history_forward=meta.history_forward,
        )

    @property
    def last_image(self) -> bytes | None:
        return self._last_image


__all__ = [
    "BINARY_HEADER_SIZE",
    "Channel",
    "DragPhase",
    "ElementKind",
    "EnrichedView",
    "ErrorNotice",
    "FrameType",
    "Hello",
    "InputEvent",
    "InputKind",
    "InvalidMessage",
    "MalformedFrame",
    "MessageKind",
    "PNG_SIGNATURE",
    "PROTOCOL_VERSION",
    "Ready",
    "Screenshot",
    "SequenceAllocator",
    "SequenceRegression",
    "SequenceTracker",
    "UIElementDescriptor",
    "UnknownKind",
    "ViewAssembler",
    "ViewMeta",
    "WireError",
    "WireMessage",
    "decode",
    "encode",
    "view_messages",
]
