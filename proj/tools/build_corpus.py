#!/usr/bin/env python3
"""Builds the golden trajectory corpus in tests/data/corpus.

Each trajectory is a list of utterances; an utterance is a list of ops spoken
in one breath (one final ASR result). Dictation ops carry only their ASR text;
their post-states follow from the pre-state. Command ops carry the ASR text,
the gold normalization, an optional program and a hand-written post-state.

Timing: 300 ms per word, 200 ms between ops, 600 ms between utterances. A
command's key interval opens 20 ms before its first word and closes at the end
of its last word.
"""
import json
import pathlib
import re
import sys

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"
WORD_MS, OP_GAP_MS, UTT_GAP_MS = 300, 200, 600


def D(text):
    return ("dictation", text)


def C(asr, normalized, post, program=None, cursor=None):
    # post: content after the command; cursor defaults to its end.
    return ("command", asr, normalized, post, program, cursor)


def state(content, cursor=None):
    c = len(content) if cursor is None else cursor
    if isinstance(c, tuple):
        return {"content": content, "selection": list(c)}
    return {"content": content, "selection": [c, c]}


def insert_dictation(pre, text):
    lo, hi = sorted(pre["selection"])
    content = pre["content"][:lo] + text + pre["content"][hi:]
    return state(content, lo + len(text))


def partial_text(word):
    return re.sub(r"[.,!?;:]+$", "", word).lower() or word.lower()


def build(tid, task, prompt, utterances, initial=None):
    initial = initial or state("")
    events, keys, segments = [], [], []
    clock = 0
    token_index = 0
    pre = initial
    for uid, ops in enumerate(utterances, start=1):
        tokens = []
        for k, op in enumerate(ops):
            if k > 0:
                clock += OP_GAP_MS
            words = op[1].split()
            first = clock
            seg_tokens = []
            for w in words:
                seg_tokens.append({"text": w, "start_ms": clock, "end_ms": clock + WORD_MS})
                clock += WORD_MS
            begin = token_index
            token_index += len(words)
            seg = {"label": op[0], "begin": begin, "end": token_index, "start_ms": first, "text": " ".join(words)}
            if op[0] == "dictation":
                post = insert_dictation(pre, (" " if begin > 0 else "") + seg["text"])
            else:
                _, _, normalized, post_content, program, cursor = op
                keys.append([first - 20, clock])
                seg["normalized"] = normalized
                if program is not None:
                    seg["program"] = program
                post = state(post_content, cursor)
            seg["post_state"] = post
            segments.append(seg)
            pre = post
            tokens.extend(seg_tokens)
        # Partial results: growing prefixes, lowercased and unpunctuated.
        for n in range(1, len(tokens)):
            if n % 2 == 1 or n == len(tokens) - 1:
                part = [dict(t, text=partial_text(t["text"])) for t in tokens[:n]]
                events.append({"kind": "partial", "utterance_id": uid, "text": " ".join(t["text"] for t in part), "tokens": part, "n_best": []})
        events.append({"kind": "final", "utterance_id": uid, "text": " ".join(t["text"] for t in tokens), "tokens": tokens, "n_best": []})
        clock += UTT_GAP_MS
    return {
        "format_version": 1,
        "id": tid,
        "task": task,
        "prompt": prompt,
        "initial_state": initial,
        "events": events,
        "key_intervals": keys,
        "segments": segments,
        "partial_versions": [],
    }


ESPEAK = '(capitalize (theText (and (like "S") (in (theText (like "eSpeak"))))))'
LOWER_W = '(lowercase (theText (and (like "W") (in (theText (and (word) (like "when")))))))'
OFF_SITE = '(replace (theText (and (like " ") (between (theText (like "off")) (theText (like "site"))))) "-")'

TRAJECTORIES = [
    build("meeting_email", "replicate_doc", "Let's meet at 2pm to discuss the analysis.", [
        [D("Let's meet at 3pm"),
         C("no wait I meant 2pm", "No wait, I meant 2pm.", "Let's meet at 2pm", '(replace (theText (like "3pm")) "2pm")')],
        [D("to discuss the analytics."),
         C("actually change analytics to analysis", "Change analytics to analysis.",
           "Let's meet at 2pm to discuss the analysis.", '(replace (theText (like "analytics")) "analysis")')],
    ]),
    build("espeak_capitalize", "replicate_doc", "Attached are the eSpeak events.", [
        [D("Attached are the espeak events.")],
        [C("capitalize the S in eSpeak", "Capitalize the s in eSpeak.", "Attached are the eSpeak events.", ESPEAK)],
    ]),
    build("lowercase_when", "replicate_doc", "Please review when possible.", [
        [D("Please review When possible.")],
        [C("lower case the w in when", "Lowercase the w in when.", "Please review when possible.", LOWER_W)],
    ]),
    build("offsite_hyphen", "replicate_doc", "See you at the off-site meeting.", [
        [D("See you at the off site meeting.")],
        [C("hyphenate off site", "Hyphenate off site.", "See you at the off-site meeting.", OFF_SITE)],
    ]),
    build("allcaps_nasa", "replicate_doc", "The meeting is about the NASA grant.", [
        [D("The meeting is about the nasa grant.")],
        [C("all caps nasa", "All caps NASA.", "The meeting is about the NASA grant.", '(allCaps (theText (like "nasa")))')],
    ]),
    build("delete_repeat", "replicate_doc", "I really want to go.", [
        [D("I really really want to go."),
         C("delete really", "Delete really.", "I really want to go.", '(delete (theText (like "really")))')],
    ]),
    build("insert_after", "replicate_doc", "Thanks very much for the update.", [
        [D("Thanks for the update.")],
        [C("insert very much after thanks", "Insert very much after thanks.", "Thanks very much for the update.",
           '(insert (thePosition (after (theText (like "Thanks")))) " very much")')],
    ]),
    build("replace_day", "replicate_doc", "The report is due Tuesday.", [
        [D("The report is due Monday.")],
        [C("replace monday with tuesday", "Replace Monday with Tuesday.", "The report is due Tuesday.",
           '(replace (theText (like "Monday")) "Tuesday")')],
    ]),
    build("move_today", "replicate_doc", "Please send today the slides to Ann.", [
        [D("Please send the slides to Ann today.")],
        [C("move today after send", "Move today after send.", "Please send today the slides to Ann.",
           '(move (theText (like "today")) (thePosition (after (theText (like "send")))))')],
    ]),
    build("select_and_redictate", "replicate_doc", "Meet me at the library.", [
        [D("Meet me at the cafe.")],
        [C("select cafe", "Select cafe.", "Meet me at the cafe.", '(moveCursor (theText (like " cafe")))', cursor=(14, 19))],
        [D("library")],
    ]),
    build("spell_name", "replicate_doc", "Please email John.", [
        [D("Please email Jon.")],
        [C("it's spelled j o h n", "Spell Jon as J-o-h-n.", "Please email John.", '(spell (theText (like "Jon")) "J-o-h-n")')],
    ]),
    build("respell_name", "replicate_doc", "Thanks to Kathryn for the notes.", [
        [D("Thanks to Katherine for the notes.")],
        [C("no it's k a t h r y n", "Respell Katherine as K-a-t-h-r-y-n.", "Thanks to Kathryn for the notes.",
           '(respell (theText (like "Katherine")) "K-a-t-h-r-y-n")')],
    ]),
    build("quote_sign", "replicate_doc", 'The sign said "closed for lunch".', [
        [D("The sign said closed for lunch.")],
        [C("put closed for lunch in quotes", "Put closed for lunch in quotes.", 'The sign said "closed for lunch".',
           '(quote (theText (like "closed for lunch")))')],
    ]),
    build("parenthesize_clause", "replicate_doc", "The budget (which is final) is attached.", [
        [D("The budget which is final is attached.")],
        [C("put which is final in parentheses", "Put which is final in parentheses.", "The budget (which is final) is attached.",
           '(parenthesize (theText (like "which is final")))')],
    ]),
    build("combine_sentences", "replicate_doc", "I will be late the train is delayed.", [
        [D("I will be late. The train is delayed.")],
        [C("combine the sentences", "Combine the sentences.", "I will be late the train is delayed.",
           '(combineSentences (findAll (sentence)))')],
    ]),
    build("combine_words", "replicate_doc", "Let's use the database for this.", [
        [D("Let's use the data base for this.")],
        [C("make data base one word", "Make data base one word.", "Let's use the database for this.",
           '(combine (theText (like "data base")))')],
    ]),
    build("speech_repair", "replicate_doc", "The event is on Friday the 23rd.", [
        [D("The event is on the 23rd.")],
        [C("I mean on Friday the 23rd", "On Friday the 23rd.", "The event is on Friday the 23rd.",
           '(correction "on Friday the 23rd")')],
    ]),
    build("do_chain", "replicate_doc", "Say hi to Bob.", [
        [D("Say hi to bob!")],
        [C("capitalize bob and make the exclamation a period", "Capitalize bob and replace the exclamation mark with a period.",
           "Say hi to Bob.", '(do (capitalize (theText (like "bob"))) (replace (theText (like "!")) "."))')],
    ]),
    build("lowercase_phrase", "replicate_doc", "Thanks for your help.", [
        [D("Thanks For Your Help.")],
        [C("lowercase for your help", "Lowercase for your help.", "Thanks for your help.",
           '(lowercase (theText (like "For Your Help")))')],
    ]),
    build("consecutive_commands", "replicate_doc", "See you in Paris.", [
        [D("see you in paris."),
         C("capitalize paris", "Capitalize Paris.", "see you in Paris.", '(capitalize (theText (like "paris")))'),
         C("capitalize see", "Capitalize see.", "See you in Paris.", '(capitalize (theText (like "see")))')],
    ]),
    build("elaborate_launch", "elaborate_doc", "Tell the team the launch moved to June.", [
        [D("The launch moved to May.")],
        [C("replace may with june", "Replace May with June.", "Hi team,\nThe launch moved to June.",
           '(replace (theText (like "May")) "June")')],
    ], initial=state("Hi team,\n")),
    build("edit_existing", "replicate_op", "Dear Sam, thank you for the lovely gift.", [
        [C("change gift to lovely gift", "Replace gift with lovely gift.", "Dear Sam, thank you for the lovely gift.",
           '(replace (theText (like "gift")) "lovely gift")')],
    ], initial=state("Dear Sam, thank you for the gift.")),
    build("insert_at_cursor", "replicate_doc", "Hi Bob, how are you", [
        [D("Hi Bob")],
        [C("insert comma", "Insert a comma.", "Hi Bob,", '(insert ",")')],
        [D("how are you")],
    ]),
    build("unannotated_program", "replicate_doc", "Please call me.", [
        [D("Please call me back.")],
        [C("scratch back", "Delete back.", "Please call me.")],
    ]),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.json"):
        old.unlink()
    for t in TRAJECTORIES:
        (OUT / f"{t['id']}.json").write_text(json.dumps(t, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {len(TRAJECTORIES)} trajectories to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
