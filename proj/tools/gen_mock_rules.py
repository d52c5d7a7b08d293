#!/usr/bin/env python3
"""Regenerates data/mock/rules.json, the scripted replies for the bundled
scenario pack.

Seeding (train domains): pay_friend needs one revision; each domain then
factors out a per-app login component, and the first consolidation pass
merges the four into login_to_app(app).

Test domains: with login_to_app available every policy passes first time;
without it (gp mode) each first policy forgets a login and shop_order needs
two revisions.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
PACK = json.loads((ROOT / "data/miniworld/scenarios.json").read_text())
DOMAINS = {d["id"]: d for d in PACK["domains"]}


def block(tag, body, arg=""):
    head = f"```{tag} {arg}".rstrip()
    return f"{head}\n{body}\n```\n"


def login(app, secret="secret"):
    return (f"  let profile = supervisor::profile()\n"
            f"  let {secret} = supervisor::password(app: \"{app}\")\n"
            f"  {app}::login(username: profile.email, password: {secret}.password)\n")


def login_component(app):
    return f"fn login_{app}() {{\n{login(app)}}}"


LOGIN_TO_APP = ("fn login_to_app(app: string) {\n"
                "  let profile = supervisor::profile()\n"
                "  let secret = supervisor::password(app: app)\n"
                "  api(app, \"login\", username: profile.email, password: secret.password)\n"
                "}")

ADD_ARTIST_SONGS = ("fn add_artist_songs(playlist_id: string, artist: string) {\n"
                    "  let songs = music::search_songs(query: artist)\n"
                    "  for song in songs {\n"
                    "    if song.artist == artist {\n"
                    "      music::add_song(playlist_id: playlist_id, song_id: song.id)\n"
                    "    }\n"
                    "  }\n"
                    "}")

CHECKOUT_SAVED_CARD = ("fn checkout_saved_card() {\n"
                       "  let card = supervisor::payment_card()\n"
                       "  shop::checkout(card_number: card.number)\n"
                       "}")

STEPS = {
    "pay_friend": ["Look up the supervisor's account and the pay password",
                   "Log in to the pay app",
                   "Transfer the amount to the friend with the note"],
    "mail_send": ["Look up the supervisor's account and the mail password",
                  "Log in to the mail app",
                  "Send the email with the subject and body"],
    "playlist_build": ["Look up the supervisor's account and the music password",
                       "Log in to the music app",
                       "Create the playlist",
                       "Search songs by the artist and add each one"],
    "contact_add": ["Look up the supervisor's account and the contacts password",
                    "Log in to the contacts app",
                    "Add the person as a contact"],
    "pay_many": ["Log in to the pay app with the supervisor's password",
                 "Transfer the amount with the note to each recipient"],
    "mail_contact": ["Log in to the contacts app with the supervisor's password",
                     "Search the contact by name",
                     "Log in to the mail app",
                     "Send the email to the contact's address"],
    "shop_order": ["Log in to the shop app with the supervisor's password",
                   "Search the product and add the quantity to the cart",
                   "Check out with the supervisor's saved payment card"],
    "note_save": ["Log in to the notes app with the supervisor's password",
                  "Create the note with the title and text"],
}


def signature_line(d):
    head = d["reference_policy"].split("{", 1)[0].strip()
    return head[len("fn "):]


def fn(d, body):
    return f"fn {signature_line(d)} {{\n{body}}}"


def abstraction_reply(dom):
    d = DOMAINS[dom]
    steps = "\n".join(f"{i + 1}. {s}" for i, s in enumerate(STEPS[dom]))
    return (block("steps", steps) + block("signature", signature_line(d)) +
            block("bindings", json.dumps(d["reference_bindings"])))


def policy_reply(src):
    return block("policy", src)


def decomposition_reply(components, notes, updated):
    return (block("components", "\n\n".join(components)) +
            block("usage-notes", "\n".join(notes)) + block("policy", updated))


rules = []


def rule(match, reply):
    rules.append({"match": match, "reply": reply})


ref = {k: d["reference_policy"].rstrip() for k, d in DOMAINS.items()}

# --- abstraction
for dom in DOMAINS:
    rule(f"TASK: ABSTRACT_DOMAIN domain={dom}", abstraction_reply(dom))

# --- train domains
pf = DOMAINS["pay_friend"]
rule("TASK: GENERATE_POLICY domain=pay_friend",
     policy_reply(fn(pf, "  pay::transfer(to: recipient, amount: amount, note: note)\n")))
rule("TASK: DEBUG_POLICY domain=pay_friend revision=1", policy_reply(ref["pay_friend"]))
for dom in ["mail_send", "playlist_build", "contact_add"]:
    rule(f"TASK: GENERATE_POLICY domain={dom}", policy_reply(ref[dom]))

rule("TASK: DECOMPOSE_POLICY domain=pay_friend", decomposition_reply(
    [login_component("pay")], ["login_pay: log in to the pay app as the supervisor"],
    fn(pf, "  login_pay()\n  pay::transfer(to: recipient, amount: amount, note: note)\n")))
ms = DOMAINS["mail_send"]
rule("TASK: DECOMPOSE_POLICY domain=mail_send", decomposition_reply(
    [login_component("mail")], ["login_mail: log in to the mail app as the supervisor"],
    fn(ms, "  login_mail()\n  mail::send_email(to: to, subject: subject, body: body)\n")))
pb = DOMAINS["playlist_build"]
rule("TASK: DECOMPOSE_POLICY domain=playlist_build", decomposition_reply(
    [login_component("music"), ADD_ARTIST_SONGS],
    ["login_music: log in to the music app as the supervisor",
     "add_artist_songs: add every song by an artist to an existing playlist"],
    fn(pb, "  login_music()\n  let playlist = music::create_playlist(name: name)\n"
           "  add_artist_songs(playlist.id, artist)\n")))
ca = DOMAINS["contact_add"]
rule("TASK: DECOMPOSE_POLICY domain=contact_add", decomposition_reply(
    [login_component("contacts")],
    ["login_contacts: log in to the contacts app as the supervisor"],
    fn(ca, "  login_contacts()\n  contacts::add_contact(name: name, email: email, phone: phone)\n")))

# First consolidation pass: the four login components share a cluster
# seeded by login_pay (c0001); add_artist_songs (c0004) stays alone.
merged = (block("components", LOGIN_TO_APP) +
          block("usage-notes", "login_to_app: log in to any app as the supervisor; "
                               "pass the app name, e.g. login_to_app(\"mail\")") +
          block("replaces", "c0001\nc0002\nc0003\nc0005") +
          block("policy", fn(pf, "  login_to_app(\"pay\")\n"
                                 "  pay::transfer(to: recipient, amount: amount, note: note)\n"),
                "pay_friend") +
          block("policy", fn(ms, "  login_to_app(\"mail\")\n"
                                 "  mail::send_email(to: to, subject: subject, body: body)\n"),
                "mail_send") +
          block("policy", fn(pb, "  login_to_app(\"music\")\n"
                                 "  let playlist = music::create_playlist(name: name)\n"
                                 "  add_artist_songs(playlist.id, artist)\n"),
                "playlist_build") +
          block("policy", fn(ca, "  login_to_app(\"contacts\")\n"
                                 "  contacts::add_contact(name: name, email: email, phone: phone)\n"),
                "contact_add"))
rule(["TASK: GENERALIZE cluster=cluster-c0001", "fn login_pay()", "fn login_contacts()"], merged)

# --- test domains, hclgp: login_to_app is in the component summaries
HAS = "name: login_to_app"
pm = DOMAINS["pay_many"]
pay_many_hcl = fn(pm, "  login_to_app(\"pay\")\n  for recipient in recipients {\n"
                      "    pay::transfer(to: recipient, amount: amount, note: note)\n  }\n")
mc = DOMAINS["mail_contact"]
mail_contact_hcl = fn(mc, "  login_to_app(\"contacts\")\n"
                          "  let matches = contacts::search_contacts(name: name)\n"
                          "  login_to_app(\"mail\")\n"
                          "  mail::send_email(to: matches[0].email, subject: subject, body: body)\n")
so = DOMAINS["shop_order"]
shop_hcl = fn(so, "  login_to_app(\"shop\")\n  let hits = shop::search_products(query: query)\n"
                  "  shop::add_to_cart(product_id: hits[0].id, quantity: quantity)\n"
                  "  let card = supervisor::payment_card()\n"
                  "  shop::checkout(card_number: card.number)\n")
shop_hcl_updated = fn(so, "  login_to_app(\"shop\")\n  let hits = shop::search_products(query: query)\n"
                          "  shop::add_to_cart(product_id: hits[0].id, quantity: quantity)\n"
                          "  checkout_saved_card()\n")
ns = DOMAINS["note_save"]
note_hcl = fn(ns, "  login_to_app(\"notes\")\n  notes::create_note(title: title, body: body)\n")

for dom, src in [("pay_many", pay_many_hcl), ("mail_contact", mail_contact_hcl),
                 ("shop_order", shop_hcl), ("note_save", note_hcl)]:
    rule([f"TASK: GENERATE_POLICY domain={dom}", HAS], policy_reply(src))

rule("TASK: DECOMPOSE_POLICY domain=shop_order", decomposition_reply(
    [CHECKOUT_SAVED_CARD], ["checkout_saved_card: check out the shop cart with the saved card"],
    shop_hcl_updated))
for dom, src in [("pay_many", pay_many_hcl), ("mail_contact", mail_contact_hcl),
                 ("note_save", note_hcl)]:
    rule(f"TASK: DECOMPOSE_POLICY domain={dom}", decomposition_reply([], [], src))

# --- test domains, gp: no components, so each first attempt misses a login
rule("TASK: GENERATE_POLICY domain=pay_many", policy_reply(fn(
    pm, "  for recipient in recipients {\n"
        "    pay::transfer(to: recipient, amount: amount, note: note)\n  }\n")))
rule("TASK: DEBUG_POLICY domain=pay_many revision=1", policy_reply(ref["pay_many"]))
rule("TASK: GENERATE_POLICY domain=mail_contact", policy_reply(fn(
    mc, "  let matches = contacts::search_contacts(name: name)\n" + login("mail", "mail_secret") +
        "  mail::send_email(to: matches[0].email, subject: subject, body: body)\n")))
rule("TASK: DEBUG_POLICY domain=mail_contact revision=1", policy_reply(ref["mail_contact"]))
rule("TASK: GENERATE_POLICY domain=shop_order", policy_reply(fn(
    so, "  let hits = shop::search_products(query: query)\n"
        "  shop::add_to_cart(product_id: hits[0].id, quantity: quantity)\n")))
rule("TASK: DEBUG_POLICY domain=shop_order revision=1", policy_reply(fn(
    so, login("shop") + "  let hits = shop::search_products(query: query)\n"
        "  shop::add_to_cart(product_id: hits[0].id, quantity: quantity)\n")))
rule("TASK: DEBUG_POLICY domain=shop_order revision=2", policy_reply(ref["shop_order"]))
rule("TASK: GENERATE_POLICY domain=note_save", policy_reply(fn(
    ns, "  notes::create_note(title: title, body: body)\n")))
rule("TASK: DEBUG_POLICY domain=note_save revision=1", policy_reply(ref["note_save"]))

# Anything else in a cluster is kept as it is.
rule("TASK: GENERALIZE", "```components\n```\n```replaces\n```\n")

out = ROOT / "data/mock/rules.json"
out.write_text(json.dumps({"rules": rules}, indent=2) + "\n")
print(f"wrote {len(rules)} rules to {out}")
