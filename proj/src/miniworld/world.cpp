#include "hclgp/miniworld/world.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>

namespace hclgp::miniworld {

namespace {

struct ApiFailure {
  std::string message;
};

using Store = std::map<std::string, Value>;

struct CallContext {
  WorldState& state;
  const std::string& app;
  const std::string& account;  // empty for public apps
  const Record& args;

  Store& store() { return state.stores[app]; }

  const Value* arg(const char* name) const {
    for (const auto& [k, v] : args) {
      if (k == name) return &v;
    }
    return nullptr;
  }
  std::string str(const char* name) const {
    const Value* v = arg(name);
    return v ? v->as_string() : std::string();
  }
  double num(const char* name) const {
    const Value* v = arg(name);
    return v ? v->as_number() : 0.0;
  }

  std::string new_id(const std::string& kind) {
    int n = ++state.counters[app];
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d", n);
    std::string id = kind + "-" + buf;
    while (store().count(id)) {
      n = ++state.counters[app];
      std::snprintf(buf, sizeof(buf), "%04d", n);
      id = kind + "-" + buf;
    }
    return id;
  }

  Value& insert(const std::string& kind, std::vector<std::pair<std::string, Value>> fields) {
    std::string id = new_id(kind);
    fields.emplace_back("id", Value(id));
    fields.emplace_back("kind", Value(kind));
    auto [it, _] = store().emplace(id, make_record(std::move(fields)));
    return it->second;
  }

  Value& get(const std::string& kind, const std::string& id) {
    auto it = store().find(id);
    if (it == store().end() || !it->second.field("kind") ||
        it->second.field("kind")->as_string() != kind) {
      throw ApiFailure{kind + " '" + id + "' not found"};
    }
    return it->second;
  }

  void erase(const std::string& kind, const std::string& id) {
    get(kind, id);
    store().erase(id);
  }

  List select(const std::function<bool(const Value&)>& pred) {
    List out;
    for (const auto& [_, rec] : store()) {
      if (pred(rec)) out.push_back(rec);
    }
    return out;
  }

  List of_kind(const std::string& kind) {
    return select([&](const Value& r) { return field_is(r, "kind", kind); });
  }

  static bool field_is(const Value& rec, const char* field,
                       const std::string& expected) {
    const Value* v = rec.field(field);
    return v && v->is_string() && v->as_string() == expected;
  }
};

using Handler = std::function<Value(CallContext&)>;

struct ApiSpec {
  ApiDoc doc;
  Handler handler;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool contains_ci(const Value* field, const std::string& query) {
  return field && field->is_string() &&
         lower(field->as_string()).find(lower(query)) != std::string::npos;
}

ApiParam param(const char* name, const char* type, const char* description,
               bool required = true) {
  return ApiParam{name, type, required, description};
}

Value id_response(const Value& rec) {
  return make_record({{"id", *rec.field("id")}});
}

const Value& supervisor_profile(const WorldState& state) {
  static const Value kEmpty;
  auto it = state.stores.find("supervisor");
  if (it == state.stores.end()) return kEmpty;
  for (const auto& [_, rec] : it->second) {
    if (CallContext::field_is(rec, "kind", "profile")) return rec;
  }
  return kEmpty;
}

ApiSpec login_api(const std::string& app) {
  ApiDoc doc{app, "login",
             {param("username", "string", "account email of the supervisor"),
              param("password", "string", "password for this app")},
             "Log into the " + app +
                 " app. Required before calling any other " + app + " api."};
  Handler handler = [app](CallContext& ctx) -> Value {
    const Value& profile = supervisor_profile(ctx.state);
    const Value* email = profile.field("email");
    std::string expected_password;
    for (const auto& [_, rec] : ctx.state.stores["supervisor"]) {
      if (CallContext::field_is(rec, "kind", "password") &&
          CallContext::field_is(rec, "app", app)) {
        expected_password = rec.field("password")->as_string();
      }
    }
    if (!email || ctx.str("username") != email->as_string() ||
        expected_password.empty() || ctx.str("password") != expected_password) {
      throw ApiFailure{"invalid credentials"};
    }
    ctx.state.sessions[app] = ctx.str("username");
    return make_record({{"app", Value(app)}, {"status", Value("logged in")}});
  };
  return {std::move(doc), std::move(handler)};
}

std::vector<ApiSpec> build_registry() {
  std::vector<ApiSpec> r;

  // supervisor ------------------------------------------------------------
  r.push_back({{"supervisor", "profile", {},
                "Show the supervisor's profile: full name and email address."},
               [](CallContext& ctx) -> Value {
                 return supervisor_profile(ctx.state);
               }});
  r.push_back({{"supervisor", "password",
                {param("app", "string", "app whose password to show")},
                "Show the supervisor's stored password for one app."},
               [](CallContext& ctx) -> Value {
                 for (const auto& rec : ctx.of_kind("password")) {
                   if (CallContext::field_is(rec, "app", ctx.str("app"))) {
                     return rec;
                   }
                 }
                 throw ApiFailure{"no password stored for app '" +
                                  ctx.str("app") + "'"};
               }});
  r.push_back({{"supervisor", "list_passwords", {},
                "List every stored app password of the supervisor."},
               [](CallContext& ctx) -> Value { return ctx.of_kind("password"); }});
  r.push_back({{"supervisor", "payment_card", {},
                "Show the supervisor's payment card number and holder."},
               [](CallContext& ctx) -> Value {
                 auto cards = ctx.of_kind("card");
                 if (cards.empty()) throw ApiFailure{"no payment card on file"};
                 return cards.front();
               }});

  // mail ------------------------------------------------------------------
  r.push_back(login_api("mail"));
  r.push_back({{"mail", "list_inbox", {},
                "List emails received by the logged-in account."},
               [](CallContext& ctx) -> Value {
                 return ctx.select([&](const Value& rec) {
                   return CallContext::field_is(rec, "kind", "email") &&
                          CallContext::field_is(rec, "to", ctx.account);
                 });
               }});
  r.push_back({{"mail", "get_email", {param("id", "string", "email id")},
                "Show one email by id."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("email", ctx.str("id"));
               }});
  r.push_back({{"mail", "send_email",
                {param("to", "string", "recipient email address"),
                 param("subject", "string", "subject line"),
                 param("body", "string", "message text")},
                "Send an email from the logged-in account to an address."},
               [](CallContext& ctx) -> Value {
                 if (ctx.str("to").find('@') == std::string::npos) {
                   throw ApiFailure{"invalid address '" + ctx.str("to") + "'"};
                 }
                 return id_response(ctx.insert(
                     "email", {{"from", Value(ctx.account)},
                               {"to", Value(ctx.str("to"))},
                               {"subject", Value(ctx.str("subject"))},
                               {"body", Value(ctx.str("body"))}}));
               }});
  r.push_back({{"mail", "delete_email", {param("id", "string", "email id")},
                "Delete one email by id."},
               [](CallContext& ctx) -> Value {
                 ctx.erase("email", ctx.str("id"));
                 return make_record({{"deleted", Value(ctx.str("id"))}});
               }});

  // pay -------------------------------------------------------------------
  auto account_of = [](CallContext& ctx, const std::string& owner) -> Value* {
    for (auto& [_, rec] : ctx.store()) {
      if (CallContext::field_is(rec, "kind", "account") &&
          CallContext::field_is(rec, "owner", owner)) {
        return &rec;
      }
    }
    return nullptr;
  };
  r.push_back(login_api("pay"));
  r.push_back({{"pay", "balance", {},
                "Show the balance of the logged-in pay account."},
               [account_of](CallContext& ctx) -> Value {
                 Value* acct = account_of(ctx, ctx.account);
                 if (!acct) throw ApiFailure{"no pay account"};
                 return make_record({{"balance", *acct->field("balance")}});
               }});
  r.push_back({{"pay", "list_transactions", {},
                "List transactions sent or received by the logged-in account."},
               [](CallContext& ctx) -> Value {
                 return ctx.select([&](const Value& rec) {
                   return CallContext::field_is(rec, "kind", "transaction") &&
                          (CallContext::field_is(rec, "from", ctx.account) ||
                           CallContext::field_is(rec, "to", ctx.account));
                 });
               }});
  r.push_back({{"pay", "get_transaction",
                {param("id", "string", "transaction id")},
                "Show one transaction by id."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("transaction", ctx.str("id"));
               }});
  r.push_back(
      {{"pay", "transfer",
        {param("to", "string", "recipient pay account email"),
         param("amount", "number", "amount of money to send"),
         param("note", "string", "note attached to the payment", false)},
        "Send money from the logged-in account to another pay user."},
       [account_of](CallContext& ctx) -> Value {
         double amount = ctx.num("amount");
         if (!(amount > 0)) throw ApiFailure{"amount must be positive"};
         Value* from = account_of(ctx, ctx.account);
         Value* to = account_of(ctx, ctx.str("to"));
         if (!from) throw ApiFailure{"no pay account"};
         if (!to) throw ApiFailure{"unknown recipient '" + ctx.str("to") + "'"};
         double balance = from->field("balance")->as_number();
         if (amount > balance) throw ApiFailure{"insufficient funds"};
         from->set_field("balance", Value(balance - amount));
         to->set_field("balance",
                       Value(to->field("balance")->as_number() + amount));
         return id_response(
             ctx.insert("transaction", {{"from", Value(ctx.account)},
                                        {"to", Value(ctx.str("to"))},
                                        {"amount", Value(amount)},
                                        {"note", Value(ctx.str("note"))}}));
       }});

  // music -----------------------------------------------------------------
  r.push_back(login_api("music"));
  r.push_back({{"music", "search_songs",
                {param("query", "string", "text matched against title or artist")},
                "Search the song catalog by title or artist (case-insensitive)."},
               [](CallContext& ctx) -> Value {
                 return ctx.select([&](const Value& rec) {
                   return CallContext::field_is(rec, "kind", "song") &&
                          (contains_ci(rec.field("title"), ctx.str("query")) ||
                           contains_ci(rec.field("artist"), ctx.str("query")));
                 });
               }});
  r.push_back({{"music", "get_song", {param("id", "string", "song id")},
                "Show one song by id."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("song", ctx.str("id"));
               }});
  r.push_back({{"music", "create_playlist",
                {param("name", "string", "playlist name")},
                "Create an empty playlist owned by the logged-in account."},
               [](CallContext& ctx) -> Value {
                 for (const auto& rec : ctx.of_kind("playlist")) {
                   if (CallContext::field_is(rec, "name", ctx.str("name"))) {
                     throw ApiFailure{"playlist '" + ctx.str("name") +
                                      "' already exists"};
                   }
                 }
                 return id_response(
                     ctx.insert("playlist", {{"owner", Value(ctx.account)},
                                             {"name", Value(ctx.str("name"))},
                                             {"songs", Value(List{})}}));
               }});
  r.push_back({{"music", "add_song",
                {param("playlist_id", "string", "playlist id"),
                 param("song_id", "string", "song id")},
                "Append a song to a playlist."},
               [](CallContext& ctx) -> Value {
                 ctx.get("song", ctx.str("song_id"));
                 Value& pl = ctx.get("playlist", ctx.str("playlist_id"));
                 List songs = pl.field("songs")->as_list();
                 Value song(ctx.str("song_id"));
                 if (std::find(songs.begin(), songs.end(), song) != songs.end()) {
                   throw ApiFailure{"song already in playlist"};
                 }
                 songs.push_back(song);
                 double count = static_cast<double>(songs.size());
                 pl.set_field("songs", Value(std::move(songs)));
                 return make_record({{"playlist_id", Value(ctx.str("playlist_id"))},
                                     {"song_count", Value(count)}});
               }});
  r.push_back({{"music", "list_playlists", {},
                "List playlists owned by the logged-in account."},
               [](CallContext& ctx) -> Value { return ctx.of_kind("playlist"); }});
  r.push_back({{"music", "delete_playlist", {param("id", "string", "playlist id")},
                "Delete a playlist."},
               [](CallContext& ctx) -> Value {
                 ctx.erase("playlist", ctx.str("id"));
                 return make_record({{"deleted", Value(ctx.str("id"))}});
               }});

  // contacts --------------------------------------------------------------
  r.push_back(login_api("contacts"));
  r.push_back({{"contacts", "search_contacts",
                {param("name", "string", "text matched against contact names")},
                "Find contacts whose name contains the text (case-insensitive)."},
               [](CallContext& ctx) -> Value {
                 return ctx.select([&](const Value& rec) {
                   return CallContext::field_is(rec, "kind", "contact") &&
                          contains_ci(rec.field("name"), ctx.str("name"));
                 });
               }});
  r.push_back({{"contacts", "get_contact", {param("id", "string", "contact id")},
                "Show one contact by id."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("contact", ctx.str("id"));
               }});
  r.push_back({{"contacts", "add_contact",
                {param("name", "string", "full name"),
                 param("email", "string", "email address"),
                 param("phone", "string", "phone number", false)},
                "Add a new contact to the address book."},
               [](CallContext& ctx) -> Value {
                 for (const auto& rec : ctx.of_kind("contact")) {
                   if (CallContext::field_is(rec, "email", ctx.str("email"))) {
                     throw ApiFailure{"contact with email '" + ctx.str("email") +
                                      "' already exists"};
                   }
                 }
                 return id_response(
                     ctx.insert("contact", {{"name", Value(ctx.str("name"))},
                                            {"email", Value(ctx.str("email"))},
                                            {"phone", Value(ctx.str("phone"))}}));
               }});
  r.push_back({{"contacts", "list_contacts", {}, "List every contact."},
               [](CallContext& ctx) -> Value { return ctx.of_kind("contact"); }});
  r.push_back({{"contacts", "delete_contact", {param("id", "string", "contact id")},
                "Remove a contact from the address book."},
               [](CallContext& ctx) -> Value {
                 ctx.erase("contact", ctx.str("id"));
                 return make_record({{"deleted", Value(ctx.str("id"))}});
               }});

  // files -----------------------------------------------------------------
  r.push_back(login_api("files"));
  r.push_back({{"files", "list_files", {}, "List stored files."},
               [](CallContext& ctx) -> Value { return ctx.of_kind("file"); }});
  r.push_back({{"files", "get_file", {param("id", "string", "file id")},
                "Show a file and its content."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("file", ctx.str("id"));
               }});
  r.push_back({{"files", "create_file",
                {param("name", "string", "file name"),
                 param("content", "string", "file content")},
                "Create a new file."},
               [](CallContext& ctx) -> Value {
                 return id_response(
                     ctx.insert("file", {{"name", Value(ctx.str("name"))},
                                         {"content", Value(ctx.str("content"))}}));
               }});
  r.push_back({{"files", "delete_file", {param("id", "string", "file id")},
                "Delete a file."},
               [](CallContext& ctx) -> Value {
                 ctx.erase("file", ctx.str("id"));
                 return make_record({{"deleted", Value(ctx.str("id"))}});
               }});

  // shop ------------------------------------------------------------------
  r.push_back(login_api("shop"));
  r.push_back({{"shop", "search_products",
                {param("query", "string", "text matched against product names")},
                "Search products by name (case-insensitive)."},
               [](CallContext& ctx) -> Value {
                 return ctx.select([&](const Value& rec) {
                   return CallContext::field_is(rec, "kind", "product") &&
                          contains_ci(rec.field("name"), ctx.str("query"));
                 });
               }});
  r.push_back({{"shop", "get_product", {param("id", "string", "product id")},
                "Show one product with price and stock."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("product", ctx.str("id"));
               }});
  r.push_back(
      {{"shop", "add_to_cart",
        {param("product_id", "string", "product id"),
         param("quantity", "number", "number of units")},
        "Put units of a product into the shopping cart."},
       [](CallContext& ctx) -> Value {
         double qty = ctx.num("quantity");
         if (!(qty >= 1) || qty != std::floor(qty)) {
           throw ApiFailure{"quantity must be a positive whole number"};
         }
         Value& product = ctx.get("product", ctx.str("product_id"));
         if (qty > product.field("stock")->as_number()) {
           throw ApiFailure{"insufficient stock"};
         }
         return id_response(
             ctx.insert("cart_item", {{"product_id", Value(ctx.str("product_id"))},
                                      {"quantity", Value(qty)}}));
       }});
  r.push_back({{"shop", "view_cart", {}, "List items in the shopping cart."},
               [](CallContext& ctx) -> Value { return ctx.of_kind("cart_item"); }});
  r.push_back(
      {{"shop", "checkout",
        {param("card_number", "string", "payment card number")},
        "Pay for everything in the cart and place an order."},
       [](CallContext& ctx) -> Value {
         List items = ctx.of_kind("cart_item");
         if (items.empty()) throw ApiFailure{"cart is empty"};
         bool card_ok = false;
         for (const auto& [_, rec] : ctx.state.stores["supervisor"]) {
           if (CallContext::field_is(rec, "kind", "card") &&
               CallContext::field_is(rec, "number", ctx.str("card_number"))) {
             card_ok = true;
           }
         }
         if (!card_ok) throw ApiFailure{"payment declined"};
         double total = 0;
         List lines;
         for (const auto& item : items) {
           const std::string pid = item.field("product_id")->as_string();
           Value& product = ctx.get("product", pid);
           double qty = item.field("quantity")->as_number();
           double stock = product.field("stock")->as_number();
           if (qty > stock) throw ApiFailure{"insufficient stock"};
           product.set_field("stock", Value(stock - qty));
           total += qty * product.field("price")->as_number();
           lines.push_back(make_record({{"product_id", Value(pid)},
                                        {"quantity", Value(qty)}}));
           ctx.store().erase(item.field("id")->as_string());
         }
         Value& order = ctx.insert("order", {{"items", Value(std::move(lines))},
                                             {"total", Value(total)}});
         return make_record({{"order_id", *order.field("id")},
                             {"total", Value(total)}});
       }});

  // notes -----------------------------------------------------------------
  r.push_back(login_api("notes"));
  r.push_back({{"notes", "list_notes", {}, "List saved notes."},
               [](CallContext& ctx) -> Value { return ctx.of_kind("note"); }});
  r.push_back({{"notes", "get_note", {param("id", "string", "note id")},
                "Show one note by id."},
               [](CallContext& ctx) -> Value {
                 return ctx.get("note", ctx.str("id"));
               }});
  r.push_back({{"notes", "create_note",
                {param("title", "string", "note title"),
                 param("body", "string", "note text")},
                "Save a new note."},
               [](CallContext& ctx) -> Value {
                 return id_response(
                     ctx.insert("note", {{"title", Value(ctx.str("title"))},
                                         {"body", Value(ctx.str("body"))}}));
               }});
  r.push_back({{"notes", "delete_note", {param("id", "string", "note id")},
                "Delete a note."},
               [](CallContext& ctx) -> Value {
                 ctx.erase("note", ctx.str("id"));
                 return make_record({{"deleted", Value(ctx.str("id"))}});
               }});
  return r;
}

const std::vector<ApiSpec>& registry() {
  static const std::vector<ApiSpec> kRegistry = build_registry();
  return kRegistry;
}

const ApiSpec* find_spec(const std::string& app, const std::string& api) {
  for (const auto& spec : registry()) {
    if (spec.doc.app == app && spec.doc.api == api) return &spec;
  }
  return nullptr;
}

bool type_ok(const std::string& type, const Value& v) {
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_bool();
  if (type == "list") return v.is_list();
  return false;
}

void check_args(const ApiDoc& doc, const Record& args) {
  for (const auto& [name, value] : args) {
    auto it = std::find_if(doc.params.begin(), doc.params.end(),
                           [&](const ApiParam& p) { return p.name == name; });
    if (it == doc.params.end()) {
      throw ApiFailure{"unexpected argument '" + name + "'"};
    }
    if (!type_ok(it->type, value)) {
      throw ApiFailure{"argument '" + name + "' must be " + it->type};
    }
  }
  for (const auto& p : doc.params) {
    if (!p.required) continue;
    bool present = std::any_of(args.begin(), args.end(),
                               [&](const auto& a) { return a.first == p.name; });
    if (!present) throw ApiFailure{"missing argument '" + p.name + "'"};
  }
}

}  // namespace

const std::map<std::string, Value>* WorldState::store(
    const std::string& app) const {
  auto it = stores.find(app);
  return it == stores.end() ? nullptr : &it->second;
}

Json to_json(const WorldState& state) {
  Json stores = Json::object();
  for (const auto& [app, store] : state.stores) {
    Json records = Json::array();
    for (const auto& [_, rec] : store) records.push_back(to_json_value(rec));
    stores[app] = records;
  }
  Json sessions = Json::object();
  for (const auto& [app, account] : state.sessions) sessions[app] = account;
  Json counters = Json::object();
  for (const auto& [app, n] : state.counters) counters[app] = n;
  return Json{{"stores", stores}, {"sessions", sessions}, {"counters", counters}};
}

bool is_public_app(const std::string& app) { return app == "supervisor"; }

ApplyResult apply_api(const WorldState& state, const std::string& app,
                      const std::string& api, const Record& args) {
  const ApiSpec* spec = find_spec(app, api);
  if (!spec) return {state, Value(), "unknown api " + app + "::" + api};
  std::string account;
  if (!is_public_app(app) && api != "login") {
    auto it = state.sessions.find(app);
    if (it == state.sessions.end()) return {state, Value(), "not logged in"};
    account = it->second;
  }
  WorldState next = state;
  try {
    check_args(spec->doc, args);
    CallContext ctx{next, app, account, args};
    Value response = spec->handler(ctx);
    return {std::move(next), std::move(response), std::nullopt};
  } catch (const ApiFailure& failure) {
    return {state, Value(), failure.message};
  }
}

const std::vector<ApiDoc>& api_docs() {
  static const std::vector<ApiDoc> kDocs = [] {
    std::vector<ApiDoc> docs;
    for (const auto& spec : registry()) docs.push_back(spec.doc);
    return docs;
  }();
  return kDocs;
}

const ApiDoc* find_api_doc(const std::string& app, const std::string& api) {
  const ApiSpec* spec = find_spec(app, api);
  return spec ? &spec->doc : nullptr;
}

MetaDomainDescriptor descriptor() {
  MetaDomainDescriptor d{"miniworld", api_docs()};
  d.validate();
  return d;
}

}  // namespace hclgp::miniworld
