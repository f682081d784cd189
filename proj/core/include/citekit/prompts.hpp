#pragma once

#include <string_view>

// Default prompt bodies shipped with the recipes. Every one of them can be
// replaced from a recipe file.
namespace citekit::prompts {

inline constexpr std::string_view kAlceAnswer =
    "Instruction: Write an accurate, engaging, and concise answer for the given question using only the "
    "provided search results (some of which might be irrelevant) and cite them properly. Use an unbiased and "
    "journalistic tone. Always cite for any factual claim. When citing several search results, use [1][2][3]. "
    "Cite at least one document and at most three documents in each sentence. If multiple documents support "
    "the sentence, only cite a minimum sufficient subset of the documents.\n\n"
    "Question: {question}\n\n{docs}\n\nAnswer:";

inline constexpr std::string_view kInteract =
    "Instruction: Write an accurate, engaging, and concise answer for the given question using only the "
    "provided search results (some of which might be irrelevant) and cite them properly. Use an unbiased and "
    "journalistic tone. Always cite for any factual claim. When citing several search results, use [1][2][3]. "
    "You are shown short summaries of the search results. Take exactly one action per turn:\n"
    "Check: Document [k]   read the full text of document k\n"
    "Output: <sentence>    write the next sentence of the answer, with citations\n"
    "End                   stop when the answer is complete\n\n"
    "Question: {question}\n\n{docs}\n\nAnswer so far: {prefix}\n\nAction:";

inline constexpr std::string_view kAttribute =
    "Instruction: Read the documents and highlight the passages needed to answer the question. Group the "
    "passages into numbered clusters, one cluster per sentence of the future answer. Under each cluster "
    "number, list every passage as \"Document [k]: <exact quote>\" on its own line.\n\n"
    "Question: {question}\n\n{docs}\n\nClusters:";

inline constexpr std::string_view kAttributedSentence =
    "Instruction: Write one sentence that continues the answer to the question using only the highlighted "
    "passages, and cite them with the document numbers shown, e.g. [1][2]. Do not repeat the answer so far.\n\n"
    "Question: {question}\n\nAnswer so far: {prefix}\n\nHighlighted passages:\n{plan}\n\nSentence:";

inline constexpr std::string_view kBlueprintQuestions =
    "In this task, you should write no more than four subquestions according to the given documents and a "
    "question. Ensure that each subquestion can be respond by reading the documents, and is related to the "
    "question. Write then in only one paragraph.\n\n"
    "Question: Who is the original artist of sound of silence?\n\n"
    "Document [1]: Sounds of Silence is the second studio album by Simon & Garfunkel, released on January 17, "
    "1966. The album's title is a slight modification of the title of the duo's first major hit, \"The Sound "
    "of Silence\", which originally was released as \"The Sounds of Silence\". The song had earlier been "
    "released in an acoustic version on the album \"Wednesday Morning, 3 A.M.\", and later on the soundtrack "
    "to the movie \"The Graduate\". \n"
    "Document [2]:  Sound of Silence\" is a song performed by Australian recording artist Dami Im. Written by "
    "Anthony Egizii and David Musumeci of DNA Songs, it is best known as Australia's entry at the Eurovision "
    "Song Contest 2016 which was held in Stockholm, Sweden, where it finished 2nd, receiving a total of 511 "
    "points.\n"
    "Document [3]: Simon & Garfunkel Simon & Garfunkel were an American folk rock duo consisting of "
    "singer-songwriter Paul Simon and singer Art Garfunkel. They were one of the bestselling music groups of "
    "the 1960s and became counterculture icons of the decade's social revolution, alongside artists such as "
    "the Beatles, the Beach Boys, and Bob Dylan. Their biggest hits\\u2014including \"The Sound of Silence\" "
    "(1964), \"Mrs. Robinson\" (1968)\n\n"
    "Sub-questions:\n"
    "Who is the original artist of sound of silence, the album? Who is the original artist of sound of "
    "silence, the song, released in 2016? Who is the original artist of sound of silence, the song, released "
    "in 1964?\"\n\n\n"
    "In this task, you should write no more than four subquestions according to the given documents and a "
    "question. Ensure that each subquestion can be respond by reading the documents, and is related to the "
    "question. Write then in only one paragraph.\n\n"
    "Question: {question}\n\n{docs}\n\nSub-questions: ";

inline constexpr std::string_view kBlueprintAnswer =
    "Instruction: Write an accurate, engaging, and concise answer for the given question using only the "
    "provided search results (some of which might be irrelevant) and cite them properly by answering all the "
    "subquestions. Each subquestion should be answered. Use an unbiased and journalistic tone. Always cite for "
    "any factual claim. When citing several search results, use [1][2][3]. Cite at least one document and at "
    "most three documents in each sentence. If multiple documents support the sentence, only cite a minimum "
    "sufficient subset of the documents.\n\n"
    "Question: {question}\n\nSub-questions: {plan}\n\n{docs}\n\nAnswer:";

inline constexpr std::string_view kRevise =
    "Instruction: Revise the draft answer to the question so that every statement is supported by the "
    "documents it cites. Keep supported statements, fix or remove unsupported ones, and cite with [1][2][3]. "
    "Write only the revised answer.\n\n"
    "Question: {question}\n\n{docs}\n\nFeedback:\n{feedback}\n\nRevised answer:";

inline constexpr std::string_view kClosedBook =
    "Instruction: Write an accurate, engaging, and concise answer for the given question. Use an unbiased "
    "and journalistic tone.\n\nQuestion: {question}\n\nAnswer:";

inline constexpr std::string_view kRecite =
    "Instruction: Recite one passage from your own knowledge that helps answer the question. Write only the "
    "passage.\n\nQuestion: {question}\n\nPassage:";

inline constexpr std::string_view kSelfRagQuery =
    "In this task, you will be given a question, and you should generate a query to find relevent documents "
    "to help generating the answer. You may be given some sentences that have been generated as context, you "
    "should try to find documents that could support another claim other than sentences generated but still "
    "relevent to the question. \n\n"
    "Given the original question: {question}\n"
    "Generated sentences: {prefix}\n"
    "Please generate one query to help find relevent documents, the query is:\n\n\nAnswer:";

inline constexpr std::string_view kSelfRagAnswer =
    "Instruction: Write only a sentence as an accurate, engaging, and concise answer for the given question "
    "using only the provided search result. Use an unbiased and journalistic tone.\n\n"
    "Question:{question}\n\nPrefix:{prefix}\n\n{docs}\n\nAnswer: ";

inline constexpr std::string_view kSelfRagSnippetAnswer =
    "Instruction: You will be presented with a snippet from documents. Write only a sentence as an accurate, "
    "engaging, and concise answer for the given question using only the provided snippets. Use an unbiased "
    "and journalistic tone.\n\n"
    "Question:{question}\n\nPrefix:{prefix}\n\n{docs}\n\nAnswer: ";

}  // namespace citekit::prompts
