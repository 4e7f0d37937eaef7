#include "moltpipe/langid.hpp"

#include "moltpipe/normalize.hpp"
#include "moltpipe/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace moltpipe {

namespace {

// Seed texts for the built-in model: a few everyday sentences per
// language, enough for character n-gram discrimination.
const std::pair<const char*, const char*> kSeeds[] = {
    {"en",
     "The weather was fine and the children walked to school together. She opened the window "
     "and looked out over the quiet street. There are many things we should think about before "
     "making a decision. He said that he would come back in the morning with the books. The "
     "quick brown fox jumps over the lazy dog while people watch from the garden. What do you "
     "think about this new place and the work that has been done here since last year?"},
    {"es",
     "El tiempo era bueno y los niños caminaban juntos a la escuela. Ella abrió la ventana y "
     "miró hacia la calle tranquila. Hay muchas cosas que debemos pensar antes de tomar una "
     "decisión. Dijo que volvería por la mañana con los libros. El rápido zorro marrón salta "
     "sobre el perro perezoso mientras la gente mira desde el jardín. ¿Qué piensas de este "
     "nuevo lugar y del trabajo que se ha hecho aquí desde el año pasado?"},
    {"fr",
     "Le temps était beau et les enfants marchaient ensemble vers l'école. Elle a ouvert la "
     "fenêtre et a regardé la rue tranquille. Il y a beaucoup de choses auxquelles nous devons "
     "penser avant de prendre une décision. Il a dit qu'il reviendrait le matin avec les "
     "livres. Le renard brun saute par-dessus le chien paresseux pendant que les gens regardent "
     "depuis le jardin. Que pensez-vous de ce nouvel endroit et du travail accompli ici?"},
    {"de",
     "Das Wetter war schön und die Kinder gingen zusammen zur Schule. Sie öffnete das Fenster "
     "und schaute auf die ruhige Straße hinaus. Es gibt viele Dinge, über die wir nachdenken "
     "sollten, bevor wir eine Entscheidung treffen. Er sagte, dass er am Morgen mit den "
     "Büchern zurückkommen würde. Der schnelle braune Fuchs springt über den faulen Hund, "
     "während die Leute vom Garten aus zuschauen. Was denkst du über diesen neuen Ort?"},
    {"it",
     "Il tempo era bello e i bambini andavano a scuola insieme. Lei aprì la finestra e guardò "
     "la strada tranquilla. Ci sono molte cose a cui dovremmo pensare prima di prendere una "
     "decisione. Disse che sarebbe tornato la mattina con i libri. La rapida volpe marrone "
     "salta sopra il cane pigro mentre la gente guarda dal giardino. Cosa pensi di questo "
     "nuovo posto e del lavoro che è stato fatto qui dall'anno scorso?"},
    {"pt",
     "O tempo estava bom e as crianças caminhavam juntas para a escola. Ela abriu a janela e "
     "olhou para a rua tranquila. Há muitas coisas em que devemos pensar antes de tomar uma "
     "decisão. Ele disse que voltaria de manhã com os livros. A rápida raposa marrom salta "
     "sobre o cão preguiçoso enquanto as pessoas observam do jardim. O que você acha deste "
     "novo lugar e do trabalho que foi feito aqui desde o ano passado?"},
    {"nl",
     "Het weer was mooi en de kinderen liepen samen naar school. Zij opende het raam en keek "
     "uit over de rustige straat. Er zijn veel dingen waarover we moeten nadenken voordat we "
     "een beslissing nemen. Hij zei dat hij in de ochtend met de boeken zou terugkomen. De "
     "snelle bruine vos springt over de luie hond terwijl de mensen vanuit de tuin toekijken."},
    {"sv",
     "Vädret var fint och barnen gick tillsammans till skolan. Hon öppnade fönstret och "
     "tittade ut över den lugna gatan. Det finns många saker vi borde tänka på innan vi "
     "fattar ett beslut. Han sade att han skulle komma tillbaka på morgonen med böckerna. Den "
     "snabba bruna räven hoppar över den lata hunden medan folk tittar på från trädgården."},
    {"da",
     "Vejret var fint og børnene gik sammen i skole. Hun åbnede vinduet og kiggede ud over "
     "den stille gade. Der er mange ting vi bør tænke over, før vi træffer en beslutning. Han "
     "sagde, at han ville komme tilbage om morgenen med bøgerne. Den hurtige brune ræv hopper "
     "over den dovne hund, mens folk kigger på fra haven."},
    {"fi",
     "Sää oli kaunis ja lapset kävelivät yhdessä kouluun. Hän avasi ikkunan ja katsoi "
     "hiljaiselle kadulle. On monia asioita, joita meidän pitäisi miettiä ennen päätöksen "
     "tekemistä. Hän sanoi palaavansa aamulla kirjojen kanssa. Nopea ruskea kettu hyppää "
     "laiskan koiran yli, kun ihmiset katselevat puutarhasta."},
    {"pl",
     "Pogoda była ładna i dzieci szły razem do szkoły. Otworzyła okno i spojrzała na cichą "
     "ulicę. Jest wiele rzeczy, o których powinniśmy pomyśleć przed podjęciem decyzji. "
     "Powiedział, że wróci rano z książkami. Szybki brązowy lis przeskakuje nad leniwym psem, "
     "podczas gdy ludzie patrzą z ogrodu."},
    {"cs",
     "Počasí bylo pěkné a děti šly spolu do školy. Otevřela okno a podívala se na tichou "
     "ulici. Je mnoho věcí, o kterých bychom měli přemýšlet, než se rozhodneme. Řekl, že se "
     "ráno vrátí s knihami. Rychlá hnědá liška skáče přes líného psa, zatímco lidé se dívají "
     "ze zahrady."},
    {"ro",
     "Vremea era frumoasă și copiii mergeau împreună la școală. Ea a deschis fereastra și a "
     "privit strada liniștită. Sunt multe lucruri la care ar trebui să ne gândim înainte de a "
     "lua o decizie. A spus că se va întoarce dimineața cu cărțile. Vulpea maro sare peste "
     "câinele leneș în timp ce oamenii privesc din grădină."},
    {"tr",
     "Hava güzeldi ve çocuklar birlikte okula yürüdüler. Pencereyi açtı ve sessiz sokağa "
     "baktı. Karar vermeden önce düşünmemiz gereken birçok şey var. Sabah kitaplarla geri "
     "döneceğini söyledi. Hızlı kahverengi tilki, insanlar bahçeden izlerken tembel köpeğin "
     "üzerinden atlar."},
    {"id",
     "Cuaca cerah dan anak-anak berjalan bersama ke sekolah. Dia membuka jendela dan melihat "
     "ke jalan yang sepi. Ada banyak hal yang harus kita pikirkan sebelum mengambil "
     "keputusan. Dia berkata akan kembali pagi hari dengan membawa buku-buku itu. Rubah "
     "cokelat yang cepat melompati anjing malas sementara orang-orang menonton dari kebun."},
    {"ru",
     "Погода была хорошая, и дети вместе шли в школу. Она открыла окно и посмотрела на тихую "
     "улицу. Есть много вещей, о которых нам следует подумать, прежде чем принять решение. "
     "Он сказал, что вернётся утром с книгами. Быстрая коричневая лиса перепрыгивает через "
     "ленивую собаку, пока люди смотрят из сада."},
    {"uk",
     "Погода була гарна, і діти разом ішли до школи. Вона відчинила вікно й подивилася на "
     "тиху вулицю. Є багато речей, про які нам слід подумати, перш ніж ухвалити рішення. Він "
     "сказав, що повернеться вранці з книжками. Швидка руда лисиця перестрибує через ледачого "
     "пса, поки люди дивляться із саду."},
    {"el",
     "Ο καιρός ήταν καλός και τα παιδιά περπατούσαν μαζί στο σχολείο. Άνοιξε το παράθυρο και "
     "κοίταξε τον ήσυχο δρόμο. Υπάρχουν πολλά πράγματα που πρέπει να σκεφτούμε πριν πάρουμε "
     "μια απόφαση. Είπε ότι θα επιστρέψει το πρωί με τα βιβλία. Η γρήγορη καφέ αλεπού πηδάει "
     "πάνω από τον τεμπέλη σκύλο ενώ οι άνθρωποι κοιτάζουν από τον κήπο."},
    {"ar",
     "كان الطقس جميلا ومشى الأطفال معا إلى المدرسة. فتحت النافذة ونظرت إلى الشارع الهادئ. "
     "هناك أشياء كثيرة يجب أن نفكر فيها قبل اتخاذ القرار. قال إنه سيعود في الصباح ومعه "
     "الكتب. يقفز الثعلب البني السريع فوق الكلب الكسول بينما يراقب الناس من الحديقة."},
    {"he",
     "מזג האוויר היה נעים והילדים הלכו יחד לבית הספר. היא פתחה את החלון והביטה אל הרחוב "
     "השקט. יש דברים רבים שעלינו לחשוב עליהם לפני קבלת החלטה. הוא אמר שיחזור בבוקר עם "
     "הספרים. השועל החום המהיר קופץ מעל הכלב העצלן בזמן שאנשים צופים מהגינה."},
    {"ja",
     "天気が良くて、子どもたちは一緒に学校へ歩いて行きました。彼女は窓を開けて静かな通りを眺めました。"
     "決断する前に考えるべきことがたくさんあります。彼は朝に本を持って戻ると言いました。"
     "素早い茶色の狐は、人々が庭から見ている間に、怠け者の犬を飛び越えます。"},
    {"zh",
     "天气很好，孩子们一起走路去学校。她打开窗户，望着安静的街道。在做决定之前，我们应该考虑很多事情。"
     "他说早上会带着书回来。敏捷的棕色狐狸跳过了懒惰的狗，人们在花园里看着。"
     "这个新地方和去年以来在这里完成的工作，你觉得怎么样？"},
    {"ko",
     "날씨가 좋아서 아이들은 함께 학교에 걸어갔습니다. 그녀는 창문을 열고 조용한 거리를 "
     "바라보았습니다. 결정을 내리기 전에 생각해야 할 것이 많습니다. 그는 아침에 책을 가지고 "
     "돌아오겠다고 말했습니다. 빠른 갈색 여우가 게으른 개를 뛰어넘는 동안 사람들은 정원에서 "
     "지켜봅니다."},
    {"hi",
     "मौसम अच्छा था और बच्चे साथ में स्कूल गए। उसने खिड़की खोली और शांत सड़क की ओर देखा। निर्णय लेने से "
     "पहले हमें कई बातों पर विचार करना चाहिए। उसने कहा कि वह सुबह किताबें लेकर लौटेगा। तेज़ भूरी लोमड़ी "
     "आलसी कुत्ते के ऊपर से कूद जाती है जबकि लोग बगीचे से देखते हैं।"},
};

void add_grams(const std::string& text,
               std::unordered_map<std::string, std::uint32_t>& counts) {
    const CodepointView view = decode_utf8(text);
    std::u32string lower;
    lower.reserve(view.size());
    for (char32_t cp : view.points) lower.push_back(to_lower(cp));
    const std::size_t n = lower.size();
    for (std::size_t len = 1; len <= 3; ++len) {
        if (n < len) break;
        for (std::size_t i = 0; i + len <= n; ++i) {
            std::string gram;
            for (std::size_t k = 0; k < len; ++k) append_utf8(gram, lower[i + k]);
            ++counts[gram];
        }
    }
}

}  // namespace

NgramClassifier::NgramClassifier(Profiles profiles) : profiles_(std::move(profiles)) {
    for (const auto& [lang, _] : profiles_) labels_.push_back(lang);
    std::sort(labels_.begin(), labels_.end());
    // Shared vocabulary size for smoothing.
    std::size_t vocab = 0;
    {
        std::unordered_map<std::string, bool> seen;
        for (const auto& [lang, counts] : profiles_)
            for (const auto& [gram, c] : counts) seen.emplace(gram, true);
        vocab = seen.size();
    }
    models_.resize(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const auto& counts = profiles_.at(labels_[i]);
        double total = 0;
        for (const auto& [gram, c] : counts) total += c;
        const double denom = total + static_cast<double>(vocab) + 1.0;
        models_[i].unseen_log_prob = std::log(1.0 / denom);
        for (const auto& [gram, c] : counts)
            models_[i].log_prob[gram] = std::log((c + 1.0) / denom);
    }
}

const NgramClassifier& NgramClassifier::builtin() {
    static const NgramClassifier instance = [] {
        Profiles profiles;
        for (const auto& [lang, seed] : kSeeds) add_grams(seed, profiles[lang]);
        return NgramClassifier(std::move(profiles));
    }();
    return instance;
}

NgramClassifier NgramClassifier::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open language model " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("moltpipe-langid\t1", 0) != 0)
        throw std::runtime_error("bad language model header in " + path);
    Profiles profiles;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw std::runtime_error("bad language model line: " + line);
        profiles[line.substr(0, t1)][line.substr(t1 + 1, t2 - t1 - 1)] =
            static_cast<std::uint32_t>(std::stoul(line.substr(t2 + 1)));
    }
    return NgramClassifier(std::move(profiles));
}

void NgramClassifier::save(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write language model " + path);
    f << "moltpipe-langid\t1\n";
    for (const auto& lang : labels_) {
        // Deterministic output order.
        std::vector<std::pair<std::string, std::uint32_t>> grams(profiles_.at(lang).begin(),
                                                                 profiles_.at(lang).end());
        std::sort(grams.begin(), grams.end());
        for (const auto& [gram, count] : grams) f << lang << '\t' << gram << '\t' << count << '\n';
    }
}

LangTag NgramClassifier::identify(std::string_view text) const {
    if (text.empty()) throw std::invalid_argument("identify: empty text");
    std::unordered_map<std::string, std::uint32_t> grams;
    add_grams(std::string(text), grams);
    std::vector<double> ll(labels_.size(), 0.0);
    for (const auto& [gram, count] : grams) {
        for (std::size_t i = 0; i < models_.size(); ++i) {
            const auto it = models_[i].log_prob.find(gram);
            const double lp = it == models_[i].log_prob.end() ? models_[i].unseen_log_prob
                                                              : it->second;
            ll[i] += lp * count;
        }
    }
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(ll.begin(), ll.end()) - ll.begin());
    const double max_ll = ll[best];
    double denom = 0.0;
    for (double v : ll) denom += std::exp(v - max_ll);
    double score = 1.0 / denom;
    const std::size_t cps = codepoint_length(text);
    if (cps < 20) score *= static_cast<double>(cps) / 20.0;
    return {labels_[best], score};
}

namespace {

std::size_t tag_comment(CommentNode& c, const Classifier& classifier) {
    std::size_t tagged = 0;
    if (!c.content.empty() && !is_sentinel(c.content)) {
        const LangTag tag = classifier.identify(c.content);
        c.lang = tag.lang;
        c.lang_score = tag.score;
        ++tagged;
    }
    for (auto& r : c.replies) tagged += tag_comment(r, classifier);
    return tagged;
}

}  // namespace

std::size_t tag_record(PostRecord& record, const Classifier& classifier) {
    std::size_t tagged = 0;
    const std::string& basis = !record.content.empty() && !is_sentinel(record.content)
                                   ? record.content
                                   : record.title;
    if (!basis.empty() && !is_sentinel(basis)) {
        const LangTag tag = classifier.identify(basis);
        record.lang = tag.lang;
        record.lang_score = tag.score;
        ++tagged;
    }
    for (auto& c : record.comments) tagged += tag_comment(c, classifier);
    return tagged;
}

}  // namespace moltpipe
