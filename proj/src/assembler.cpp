#include "codonsoup/assembler.hpp"

#include "codonsoup/error.hpp"
#include "codonsoup/virtual_os.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

namespace codonsoup {

namespace {

constexpr std::array<std::pair<Op, std::int64_t>, 8> kAddLadder{{
    {Op::Add4000, 0x4000},
    {Op::Add1000, 0x1000},
    {Op::Add0400, 0x0400},
    {Op::Add0100, 0x0100},
    {Op::Add0040, 0x0040},
    {Op::Add0010, 0x0010},
    {Op::Add0004, 0x0004},
    {Op::Add0001, 0x0001},
}};

constexpr int kMaxLayoutPasses = 64;

[[noreturn]] void syntax(int line, const std::string& msg)
{
    throw Error(Errc::AssemblySyntax, "line " + std::to_string(line) + ": " + msg);
}

std::uint32_t rotl32(std::uint32_t x, unsigned n) noexcept
{
    n &= 31;
    return n == 0 ? x : (x << n) | (x >> (32 - n));
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool is_ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

using LabelMap = std::map<std::string, std::int64_t, std::less<>>;

struct EvalContext {
    const LabelMap* labels;
    std::int64_t length;
    std::int64_t data_offset;
    bool strict; // undefined labels are errors rather than 0
    int line;
};

class ExprParser {
public:
    ExprParser(std::string_view text, const EvalContext& ctx) : s_(text), ctx_(ctx) {}

    std::int64_t parse()
    {
        const std::int64_t v = expr();
        skip_ws();
        if (pos_ != s_.size())
            syntax(ctx_.line, "unexpected '" + std::string(s_.substr(pos_)) + "' in expression");
        return v;
    }

private:
    std::int64_t expr()
    {
        std::int64_t v = term();
        for (;;) {
            skip_ws();
            if (accept('+'))
                v += term();
            else if (accept('-'))
                v -= term();
            else
                return v;
        }
    }

    std::int64_t term()
    {
        skip_ws();
        if (accept('-'))
            return -term();
        if (accept('(')) {
            const std::int64_t v = expr();
            expect(')');
            return v;
        }
        if (pos_ < s_.size() && s_[pos_] == '$') {
            ++pos_;
            const auto name = ident();
            if (name == "LENGTH")
                return ctx_.length;
            if (name == "DATA")
                return ctx_.data_offset;
            syntax(ctx_.line, "unknown symbol $" + std::string(name));
        }
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            return number();
        if (pos_ < s_.size() && is_ident_start(s_[pos_])) {
            const auto name = ident();
            if (name == "rol" || name == "ror") {
                expect('(');
                const std::int64_t x = expr();
                expect(',');
                const std::int64_t n = expr();
                expect(')');
                const auto r = static_cast<unsigned>(n & 31);
                const auto value = static_cast<std::uint32_t>(x);
                return rotl32(value, name == "rol" ? r : (32 - r) & 31);
            }
            const auto it = ctx_.labels->find(name);
            if (it != ctx_.labels->end())
                return it->second;
            if (ctx_.strict)
                syntax(ctx_.line, "undefined label '" + std::string(name) + "'");
            return 0;
        }
        syntax(ctx_.line, "malformed expression '" + std::string(s_) + "'");
    }

    std::int64_t number()
    {
        int base = 10;
        if (s_.substr(pos_, 2) == "0x" || s_.substr(pos_, 2) == "0X") {
            base = 16;
            pos_ += 2;
        }
        std::uint64_t v = 0;
        const char* first = s_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v, base);
        if (ec != std::errc() || ptr == first || v > 0xFFFF'FFFFull)
            syntax(ctx_.line, "bad number in '" + std::string(s_) + "'");
        pos_ += static_cast<std::size_t>(ptr - first);
        return static_cast<std::int64_t>(v);
    }

    std::string_view ident()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_ident_char(s_[pos_]))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
            syntax(ctx_.line, std::string("expected '") + c + "' in '" + std::string(s_) + "'");
    }

    std::string_view s_;
    const EvalContext& ctx_;
    std::size_t pos_ = 0;
};

enum class Kind : std::uint8_t {
    Label,
    Instr,
    AddNumber,
    Rol,
    Start,
    Stop,
    PadIntron,
    Data,
    Dword,
    Byte,
    ApiHash,
    Reserve,
    PadTo,
};

struct Statement {
    Kind kind;
    int line;
    Op op = Op::NopReal;
    std::string arg; // expression text, label name or API name
};

bool code_only(Kind k)
{
    return k == Kind::Instr || k == Kind::AddNumber || k == Kind::Rol || k == Kind::Start || k == Kind::Stop
           || k == Kind::PadIntron;
}

bool data_only(Kind k)
{
    return k == Kind::Dword || k == Kind::Byte || k == Kind::ApiHash || k == Kind::Reserve;
}

std::string parse_string_literal(std::string_view arg, int line)
{
    arg = trim(arg);
    if (arg.size() < 2 || arg.front() != '"' || arg.back() != '"')
        syntax(line, "expected a quoted name");
    const auto inner = arg.substr(1, arg.size() - 2);
    if (inner.empty() || inner.find('"') != std::string_view::npos)
        syntax(line, "bad quoted name");
    return std::string(inner);
}

std::vector<Statement> parse_source(std::string_view source)
{
    std::vector<Statement> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        const std::size_t nl = source.find('\n', pos);
        std::string_view line = source.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
        ++line_no;
        if (const auto semi = line.find(';'); semi != std::string_view::npos)
            line = line.substr(0, semi);
        line = trim(line);

        // Leading label.
        if (!line.empty() && is_ident_start(line.front())) {
            std::size_t i = 0;
            while (i < line.size() && is_ident_char(line[i]))
                ++i;
            if (i < line.size() && line[i] == ':') {
                out.push_back({Kind::Label, line_no, Op::NopReal, std::string(line.substr(0, i))});
                line = trim(line.substr(i + 1));
            }
        }
        if (line.empty())
            continue;

        std::size_t ws = 0;
        while (ws < line.size() && !std::isspace(static_cast<unsigned char>(line[ws])))
            ++ws;
        const std::string_view word = line.substr(0, ws);
        const std::string_view arg = trim(line.substr(ws));

        const auto with_arg = [&](Kind k) {
            if (arg.empty())
                syntax(line_no, std::string(word) + " needs an argument");
            out.push_back({k, line_no, Op::NopReal, std::string(arg)});
        };
        const auto bare = [&](Kind k) {
            if (!arg.empty())
                syntax(line_no, std::string(word) + " takes no argument");
            out.push_back({k, line_no, Op::NopReal, {}});
        };

        if (word == "addnumber")
            with_arg(Kind::AddNumber);
        else if (word == "rol_regA")
            with_arg(Kind::Rol);
        else if (word == "START")
            bare(Kind::Start);
        else if (word == "STOP")
            bare(Kind::Stop);
        else if (word == "PAD-INTRON")
            with_arg(Kind::PadIntron);
        else if (word == "DATA")
            bare(Kind::Data);
        else if (word == "dword")
            with_arg(Kind::Dword);
        else if (word == "byte")
            with_arg(Kind::Byte);
        else if (word == "apihash")
            out.push_back({Kind::ApiHash, line_no, Op::NopReal, parse_string_literal(arg, line_no)});
        else if (word == "reserve")
            with_arg(Kind::Reserve);
        else if (word == "PAD-TO")
            with_arg(Kind::PadTo);
        else if (const auto op = parse_mnemonic(word)) {
            if (!arg.empty())
                syntax(line_no, std::string(word) + " takes no operand");
            out.push_back({Kind::Instr, line_no, *op, {}});
        } else {
            throw Error(Errc::UnknownMnemonic, "line " + std::to_string(line_no) + ": '" + std::string(word) + "'");
        }
    }
    return out;
}

struct Layout {
    LabelMap labels;
    std::int64_t data_offset = -1; // -1 until DATA is seen
    std::int64_t total = 0;

    friend bool operator==(const Layout&, const Layout&) = default;
};

// Walks the program once. With `emit` set, also produces codons.
class Walker {
public:
    Walker(const std::vector<Statement>& program, const Alphabet& alpha, const AssembleOptions& options)
        : program_(program), alpha_(alpha), options_(options)
    {
    }

    Layout pass(const Layout& prev, bool strict, std::vector<Codon>* emit, Rng* rng)
    {
        Layout cur;
        std::int64_t idx = 0;
        bool in_data = false;
        const auto eval = [&](const Statement& st) {
            const EvalContext ctx{&prev.labels, prev.total, prev.data_offset < 0 ? prev.total : prev.data_offset,
                                  strict, st.line};
            return ExprParser(st.arg, ctx).parse();
        };
        const auto count = [&](const Statement& st) {
            const std::int64_t n = eval(st);
            if (n < 0 || n > static_cast<std::int64_t>(layout::kMaxGenomeLength))
                syntax(st.line, "count out of range");
            return n;
        };
        const auto put_ops = [&](const std::vector<Op>& ops) {
            for (Op op : ops) {
                const auto& lowered = lowered_(op);
                idx += static_cast<std::int64_t>(lowered.size());
                if (emit)
                    for (Op l : lowered)
                        emit->push_back(pick(l, *rng));
            }
        };
        const auto put_bytes = [&](std::uint64_t value, int n) {
            idx += n;
            if (emit)
                for (int i = 0; i < n; ++i)
                    emit->push_back(static_cast<Codon>(value >> (8 * i)));
        };

        for (const auto& st : program_) {
            if (in_data && code_only(st.kind))
                syntax(st.line, "code statement after DATA");
            if (!in_data && data_only(st.kind))
                syntax(st.line, "data statement before DATA");
            switch (st.kind) {
            case Kind::Label:
                if (cur.labels.count(st.arg) != 0)
                    syntax(st.line, "duplicate label '" + st.arg + "'");
                cur.labels[st.arg] = in_data ? idx - cur.data_offset : idx;
                break;
            case Kind::Instr:
                put_ops({st.op});
                break;
            case Kind::AddNumber:
                put_ops(expand_addnumber(eval(st)));
                break;
            case Kind::Rol:
                put_ops(expand_rol_regA(eval(st)));
                break;
            case Kind::Start:
                put_bytes(alpha_.start_codon(), 1);
                break;
            case Kind::Stop:
                put_bytes(alpha_.stop_codon(), 1);
                break;
            case Kind::PadIntron: {
                const std::int64_t n = count(st);
                put_bytes(alpha_.stop_codon(), 1);
                idx += n;
                if (emit)
                    for (std::int64_t i = 0; i < n; ++i)
                        emit->push_back(intron_codon(*rng));
                put_bytes(alpha_.start_codon(), 1);
                break;
            }
            case Kind::Data:
                if (in_data)
                    syntax(st.line, "second DATA directive");
                in_data = true;
                cur.data_offset = idx;
                break;
            case Kind::Dword: {
                const std::int64_t v = eval(st);
                if (v < -0x8000'0000ll || v > 0xFFFF'FFFFll)
                    syntax(st.line, "dword out of range");
                put_bytes(static_cast<std::uint32_t>(v), 4);
                break;
            }
            case Kind::Byte: {
                const std::int64_t v = eval(st);
                if (v < -0x80 || v > 0xFF)
                    syntax(st.line, "byte out of range");
                put_bytes(static_cast<std::uint8_t>(v), 1);
                break;
            }
            case Kind::ApiHash:
                put_bytes(hash12(st.arg), 4);
                break;
            case Kind::Reserve: {
                const std::int64_t n = count(st);
                for (std::int64_t i = 0; i < n; ++i)
                    put_bytes(0, 1);
                break;
            }
            case Kind::PadTo: {
                const std::int64_t target = count(st);
                if (target < idx) {
                    if (strict)
                        syntax(st.line, "PAD-TO " + std::to_string(target) + " but already at "
                                            + std::to_string(idx));
                    break;
                }
                if (in_data) {
                    while (idx < target)
                        put_bytes(0, 1);
                } else {
                    put_ops(std::vector<Op>(static_cast<std::size_t>(target - idx), Op::NopReal));
                }
                break;
            }
            }
        }
        cur.total = idx;
        return cur;
    }

private:
    const std::vector<Op>& lowered_(Op op)
    {
        auto& slot = cache_[index_of(op)];
        if (!slot)
            slot = lower(op, options_.lowering);
        return *slot;
    }

    Codon pick(Op op, Rng& rng) const
    {
        const auto codons = alpha_.codons_for(op);
        if (codons.empty())
            throw Error(Errc::NoCodonForInstruction, std::string(mnemonic(op)));
        return codons[rng.below(codons.size())];
    }

    Codon intron_codon(Rng& rng) const
    {
        for (;;) {
            const auto c = static_cast<Codon>(rng.below(256));
            if (c != alpha_.start_codon())
                return c;
        }
    }

    const std::vector<Statement>& program_;
    const Alphabet& alpha_;
    const AssembleOptions& options_;
    std::array<std::optional<std::vector<Op>>, kInstructionCount> cache_;
};

} // namespace

std::vector<Op> expand_addnumber(std::int64_t k)
{
    if (k < 0 || k > 0xFFFF)
        throw Error(Errc::AddNumberRange, "addnumber " + std::to_string(k));
    std::vector<Op> out;
    for (const auto& [op, power] : kAddLadder) {
        for (; k >= power; k -= power)
            out.push_back(op);
    }
    return out;
}

std::vector<Op> expand_rol_regA(std::int64_t c)
{
    if (c < 1 || c > 31)
        throw Error(Errc::AssemblySyntax, "rol_regA count " + std::to_string(c) + " outside 1..31");
    std::vector<Op> out{Op::Zer0};
    const auto append = [&](std::initializer_list<Op> ops) { out.insert(out.end(), ops); };
    const auto add = [&](std::int64_t k) {
        const auto ops = expand_addnumber(k);
        out.insert(out.end(), ops.begin(), ops.end());
    };
    add(c);
    append({Op::Save, Op::NopsA, Op::Shl, Op::Push, Op::Zer0});
    add(32 - c);
    append({Op::Save, Op::NopsA, Op::Shr, Op::Save, Op::Pop, Op::AddSaved, Op::NopdA});
    return out;
}

Assembly assemble_detailed(std::string_view source, const Alphabet& alpha, Rng& rng, const AssembleOptions& options)
{
    const auto program = parse_source(source);
    Walker walker(program, alpha, options);

    Layout layout;
    bool converged = false;
    for (int i = 0; i < kMaxLayoutPasses && !converged; ++i) {
        Layout next = walker.pass(layout, false, nullptr, nullptr);
        converged = next == layout;
        layout = std::move(next);
    }
    if (!converged)
        throw Error(Errc::AssemblySyntax, "label layout does not settle");

    Assembly out;
    std::vector<Codon> codons;
    codons.reserve(static_cast<std::size_t>(layout.total));
    const Layout final_layout = walker.pass(layout, true, &codons, &rng);
    if (!(final_layout == layout) || codons.size() != static_cast<std::size_t>(layout.total))
        throw Error(Errc::AssemblySyntax, "layout changed while emitting");
    if (codons.size() > layout::kMaxGenomeLength)
        throw Error(Errc::AssemblySyntax, "genome longer than the code region");
    const auto offset = layout.data_offset < 0 ? codons.size() : static_cast<std::size_t>(layout.data_offset);
    out.genome = Genome(std::move(codons), offset);
    out.labels = std::move(layout.labels);
    return out;
}

Genome assemble(std::string_view source, const Alphabet& alpha, Rng& rng, const AssembleOptions& options)
{
    return assemble_detailed(source, alpha, rng, options).genome;
}

std::string ancestor_source(const AncestorOptions& options)
{
    std::ostringstream s;
    s << "; self-replicator: spawns " << options.offspring << " copies of its own image, then exits\n";
    if (options.intron_codons > 0 && options.placement == IntronPlacement::Head)
        s << "intron: PAD-INTRON " << options.intron_codons << "\n";
    s << R"(
; RegB := stub of vspawn
        zer0
        addnumber h_vspawn
        save
        getDO
        addsaved
        getdata
        CallAPILoadLibrary
        nopdB
; RegD := offspring still to make
        zer0
        addnumber )"
      << options.offspring << R"(
        nopdD
spawn:  getEIP
        saveJmpOff                  ; BA2 := spawn
; push length (stored rotated)
        zer0
        addnumber size_rot
        save
        getDO
        addsaved
        getdata
        nopdA
        rol_regA 5
        nopsA
        push
; push own base address
base:   getEIP
        nopdA
        zer0
        addnumber base
        save
        nopsA
        subsaved
        push
; vspawn(base, length)
        nopsB
        call
; RegA is 1 when the child was admitted; otherwise try again
        zer0
        add0001
        save
        nopsA
        xor
        JnzUp
; one fewer to go
        nopsD
        sub0001
        nopdD
        JnzUp
; vexit()
        zer0
        addnumber h_vexit
        save
        getDO
        addsaved
        getdata
        CallAPILoadLibrary
        call
)";
    if (options.intron_codons > 0 && options.placement == IntronPlacement::Tail)
        s << "intron: PAD-INTRON " << options.intron_codons << "\n";
    const std::size_t padding = options.intron_codons > 0 ? options.intron_codons + 2 : 0;
    s << R"(
DATA
h_vspawn: apihash "vspawn"
h_vexit:  apihash "vexit"
size_rot: dword rol($LENGTH, 27)
        PAD-TO )"
      << options.exon_codons + padding << "\n";
    return s.str();
}

} // namespace codonsoup
